//! Built-in experiment configs, selectable with `--preset NAME`.

pub struct Preset {
    pub name: &'static str,
    pub command: &'static str,
    pub summary: &'static str,
    pub config: &'static str,
}

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}

pub static PRESETS: &[Preset] = &[
    Preset {
        name: "worked-examples",
        command: "admissible",
        summary: "the ten worked admissibility examples",
        config: r#"
[[admissible.cases]]
theorem = "T2A"
params = { sigma = 2, delta = "9/10", n = 3, q = 5, m = 1, s = 2 }

[[admissible.cases]]
theorem = "T3A"
params = { sigma = 2, delta = "9/10", n = 3, q = 5, m = 1, s = "3/2" }

[[admissible.cases]]
theorem = "T4A"
params = { sigma = 2, delta = "9/10", n = 3, q = 5, m = 1, s = "5/2" }

[[admissible.cases]]
theorem = "T5A"
params = { sigma = 2, delta = "9/10", n = 5, q = 5, m = 1, s = 5 }

[[admissible.cases]]
theorem = "T6A"
params = { sigma = 2, delta = "9/10", n = 3, q = 5, m = 1, s = 5 }

[[admissible.cases]]
theorem = "T2B"
params = { sigma = 2, delta = "7/8", n = 9, q = 4, m = 1, s = 2 }

[[admissible.cases]]
theorem = "T3B"
params = { sigma = 2, delta = "7/8", n = 9, q = 4, m = 1, s = "9/5" }

[[admissible.cases]]
theorem = "T4B"
params = { sigma = 2, delta = "7/8", n = 9, q = 4, m = 1, s = "5/2" }

[[admissible.cases]]
theorem = "T5B"
params = { sigma = 2, delta = "7/8", n = 8, q = 4, m = 1, s = 5 }

[[admissible.cases]]
theorem = "T6B"
params = { sigma = 2, delta = "7/8", n = 9, q = 4, m = 1, s = 5 }
"#,
    },
    Preset {
        name: "linear-decay",
        command: "decay-fit",
        summary: "L² decay of u from Gaussian u0 on a long 1D box",
        config: r#"
[params]
sigma = 1
delta = "1/4"
n = 1
q = 2
m = 1
s = 1

[decay_fit]
window = [10.0, 500.0]
samples = 25
observables = ["u_l2"]
tol = 0.1

[decay_fit.grid]
points = 32768
half_length = 400.0

[decay_fit.data]
u0 = 1.0
u1 = 0.0
width = 1.0
"#,
    },
    Preset {
        name: "linear-decay-u1",
        command: "decay-fit",
        summary: "L² norm of u from Gaussian u1, which barely decays",
        config: r#"
[params]
sigma = 1
delta = "1/4"
n = 1
q = 2
m = 1
s = 1

[decay_fit]
window = [20.0, 500.0]
samples = 25
observables = ["u_l2"]
tol = 0.1

[decay_fit.grid]
points = 32768
half_length = 400.0

[decay_fit.data]
u0 = 0.0
u1 = 1.0
width = 1.0
"#,
    },
    Preset {
        name: "kernel-small-t",
        command: "kernel-norm",
        summary: "high-band L¹ norm of K0 as t → 0",
        config: r#"
[params]
sigma = 1
delta = "1/4"
n = 1
q = 2
m = 1
s = 1

[kernel_norm]
kernel = "K0"
band = "high"
a = 0
r = 1
regime = "small_t"
"#,
    },
    Preset {
        name: "kernel-low-k1",
        command: "kernel-norm",
        summary: "low-band L¹ norm of K1 as t → 0",
        config: r#"
[params]
sigma = 1
delta = "1/4"
n = 1
q = 2
m = 1
s = 1

[kernel_norm]
kernel = "K1"
band = "low"
a = 0
r = 1
regime = "small_t"
tol = 0.1
"#,
    },
    Preset {
        name: "kernel-large-t",
        command: "kernel-norm",
        summary: "full L¹ norm of |D|K0 as t → ∞",
        config: r#"
[params]
sigma = 1
delta = "1/4"
n = 1
q = 2
m = 1
s = 1

[kernel_norm]
kernel = "K0"
band = "full"
a = 1
r = 1
regime = "large_t"
tol = 0.1
"#,
    },
    Preset {
        name: "semilinear-smoke",
        command: "evolve",
        summary: "small data for |u|^p in 2D with p inside the T2A interval",
        config: r#"
[params]
sigma = "5/4"
delta = "1/2"
n = 2
q = 2
m = 1
s = "5/4"
p = 8

[evolve]
dt = 0.1
t_end = 200.0
stride = 50
monotone_from = 10.0

[evolve.grid]
points = 128
half_length = 128.0

[evolve.data]
u0 = 0.001
u1 = 0.0
width = 4.0
"#,
    },
    Preset {
        name: "gevrey",
        command: "gevrey",
        summary: "weighted high-frequency energy of the linear flow on [0, 10]",
        config: r#"
[params]
sigma = 1
delta = "1/4"
n = 1
q = 2
m = 1
s = 1

[gevrey]
c = 0.2
t_end = 10.0
samples = 41
bound = 2.0

[gevrey.grid]
points = 4096
half_length = 64.0

[gevrey.data]
u0 = 1.0
u1 = 0.0
width = 1.0
"#,
    },
    Preset {
        name: "bell-check",
        command: "toolkit",
        summary: "partition counts and Bell numbers up to order 12",
        config: r#"
[toolkit]
task = "bell-check"
order = 12
"#,
    },
    Preset {
        name: "faa-di-bruno",
        command: "toolkit",
        summary: "Faà di Bruno partitions of order 4",
        config: r#"
[toolkit]
task = "partitions"
order = 4
"#,
    },
    Preset {
        name: "duhamel-lattice",
        command: "toolkit",
        summary: "Duhamel integral against its bound on the (α, β) lattice",
        config: r#"
[toolkit]
task = "duhamel"
step = 0.25
extent = 3.0
times = [1.0, 10.0, 100.0, 1000.0]
spread_from = 10.0
max_spread = 3.0
"#,
    },
];
