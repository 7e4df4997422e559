// Calibration search for the reference blade config.
//
// The blade surrogate is a clamped tapered beam: width and height follow
// independent two-segment piecewise-linear laws (root value, knot value,
// tip value), the structural twist decreases linearly from the root to zero
// at the tip, and the accelerometer is a lumped mass preset to 13.6% of the
// blade mass at the sensor node. This tool searches that parameter space for
// a geometry whose first six modal frequencies land close to the measured
// reference values while keeping the spectrum well separated and the sensor
// placement properties expected of the physical setup:
//   * every inter-mode gap at least ~18 Hz,
//   * mode 1 has the smallest normalized |u_x| at the sensor position,
//   * modes 3, 4 and 6 keep healthy sensor/impact pickup so their FRF peaks
//     dominate.
//
// Random search with per-candidate seeds (reproducible at any thread count)
// followed by a multiplicative coordinate descent. The winning geometry is
// written as a blade config JSON; re-running with the same seed and budget
// reproduces the shipped file.
//
// Usage: calibrate_blade --out configs/blade_reference.json [--budget N] [--seed S]

#include "bladefd/config.hpp"
#include "bladefd/fem.hpp"
#include "bladefd/parallel.hpp"
#include "bladefd/rng.hpp"

#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <vector>

using namespace bladefd;

namespace {

constexpr std::array<double, 6> kTargetsHz = {35.4, 93.0, 111.1, 207.5, 267.0, 372.3};
constexpr double kSensorMassFraction = 0.136;
constexpr int kElements = 60;

struct Params {
    double h0, h_knot_frac, h_tip_frac, z_knot_h;
    double b0, b_knot_frac, b_tip_frac, z_knot_b;
    double twist_root_deg;
};

double lerp2(double z, double zk, double v0, double vk, double vt) {
    if (z <= zk) return v0 + (vk - v0) * (z / zk);
    return vk + (vt - vk) * ((z - zk) / (1.0 - zk));
}

fem::BladeConfig build_config(const Params& p) {
    fem::BladeConfig c;
    c.length_m = 0.300;
    c.n_elements = kElements;
    c.clamp_length_m = 0.020;
    c.sensor_position_m = 0.100;
    c.impact_position_m = 0.065;
    c.material.density_kgm3 = 1124.6;
    c.material.youngs_modulus_pa = 2.55e9;
    c.material.poisson_ratio = 0.35;
    c.material.modal_damping_ratio = 0.015;

    double hk = p.h0 * p.h_knot_frac, ht = hk * p.h_tip_frac;
    double bk = p.b0 * p.b_knot_frac, bt = bk * p.b_tip_frac;
    for (int i = 0; i < kElements; ++i) {
        double s0 = i * c.length_m / kElements;
        double s1 = (i + 1) * c.length_m / kElements;
        double zf = (0.5 * (s0 + s1)) / c.length_m;
        double h = lerp2(zf, p.z_knot_h, p.h0, hk, ht);
        double b = lerp2(zf, p.z_knot_b, p.b0, bk, bt);
        fem::SectionProps s;
        s.span_start_m = s0;
        s.span_end_m = s1;
        s.area_m2 = b * h;
        s.i_flap_m4 = b * h * h * h / 12.0;
        s.i_edge_m4 = h * b * b * b / 12.0;
        s.twist_rad = p.twist_root_deg * (1.0 - zf) * fem::kPi / 180.0;
        c.sections.push_back(s);
    }
    c.sensor_point_mass_kg = kSensorMassFraction * fem::blade_mass(c);
    return c;
}

struct Evaluation {
    double score = 1e18;
    std::array<double, 6> freqs{};
    bool feasible = false;
};

Evaluation evaluate(const Params& p) {
    Evaluation ev;
    fem::BladeConfig cfg;
    try {
        cfg = build_config(p);
        auto sys = fem::build_system(cfg);
        auto modal = fem::solve_modes(sys, 6);

        double pen = 0.0;
        for (int m = 0; m < 6; ++m) {
            ev.freqs[static_cast<std::size_t>(m)] = modal.frequencies_hz[static_cast<std::size_t>(m)];
            double rel = (modal.frequencies_hz[static_cast<std::size_t>(m)] - kTargetsHz[static_cast<std::size_t>(m)]) /
                         kTargetsHz[static_cast<std::size_t>(m)];
            pen += rel * rel;
            if (std::abs(rel) > 0.18) pen += 400.0 * (std::abs(rel) - 0.18) * (std::abs(rel) - 0.18);
        }
        bool brackets = true, gaps = true;
        for (int m = 0; m < 6; ++m)
            brackets &= std::abs(ev.freqs[static_cast<std::size_t>(m)] - kTargetsHz[static_cast<std::size_t>(m)]) <=
                        0.20 * kTargetsHz[static_cast<std::size_t>(m)];
        for (int m = 0; m + 1 < 6; ++m) {
            double g = ev.freqs[static_cast<std::size_t>(m + 1)] - ev.freqs[static_cast<std::size_t>(m)];
            if (g < 18.0) {
                pen += 10.0 * ((18.0 - g) / 18.0) * ((18.0 - g) / 18.0);
                gaps = false;
            }
        }

        auto shape = fem::sample_mode_shape(modal, cfg, {cfg.sensor_position_m});
        double u1 = std::abs(shape[0].u_x[0]);
        double umin = 1e18;
        for (int m = 1; m < 6; ++m) umin = std::min(umin, std::abs(shape[static_cast<std::size_t>(m)].u_x[0]));
        double ratio = u1 / (umin + 1e-12);
        bool sensor_ok = ratio < 0.8;
        if (ratio > 0.8) pen += 25.0 * (ratio - 0.8) * (ratio - 0.8);

        int sensor_node = fem::detail::nearest_node(cfg, cfg.sensor_position_m);
        int impact_node = fem::detail::nearest_node(cfg, cfg.impact_position_m);
        std::array<double, 6> residue{};
        double rmax = 0.0;
        for (int m = 0; m < 6; ++m) {
            residue[static_cast<std::size_t>(m)] = std::abs(modal.mode_shapes(4 * sensor_node, m) *
                                                            modal.mode_shapes(4 * impact_node, m));
            rmax = std::max(rmax, residue[static_cast<std::size_t>(m)]);
        }
        bool pickup_ok = true;
        for (int m = 0; m < 6; ++m) {
            double q = residue[static_cast<std::size_t>(m)] / (rmax + 1e-300);
            double need = (m == 2 || m == 3 || m == 5) ? 0.10 : 0.02;
            if (q < need) {
                pen += 50.0 * (need - q) * (need - q) / (need * need);
                pickup_ok = false;
            }
        }

        ev.score = pen;
        ev.feasible = brackets && gaps && sensor_ok && pickup_ok;
    } catch (const std::exception&) {
        ev.score = 1e18;
    }
    return ev;
}

Params random_params(Rng& rng) {
    Params p;
    p.h0 = rng.uniform(0.006, 0.016);
    p.h_knot_frac = rng.uniform(0.30, 1.0);
    p.h_tip_frac = rng.uniform(0.05, 0.9);
    p.z_knot_h = rng.uniform(0.2, 0.8);
    p.b0 = rng.uniform(0.020, 0.060);
    p.b_knot_frac = rng.uniform(0.30, 1.0);
    p.b_tip_frac = rng.uniform(0.05, 0.9);
    p.z_knot_b = rng.uniform(0.2, 0.8);
    p.twist_root_deg = rng.uniform(5.0, 45.0);
    return p;
}

void clamp_params(Params& p) {
    auto clamp = [](double& v, double lo, double hi) { v = std::clamp(v, lo, hi); };
    clamp(p.h0, 0.004, 0.020);
    clamp(p.h_knot_frac, 0.2, 1.0);
    clamp(p.h_tip_frac, 0.03, 1.0);
    clamp(p.z_knot_h, 0.1, 0.9);
    clamp(p.b0, 0.012, 0.080);
    clamp(p.b_knot_frac, 0.2, 1.0);
    clamp(p.b_tip_frac, 0.03, 1.0);
    clamp(p.z_knot_b, 0.1, 0.9);
    clamp(p.twist_root_deg, 2.0, 60.0);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"reference blade geometry calibration search"};
    std::string out_path = "configs/blade_reference.json";
    int budget = 6000;
    int refine_iters = 1200;
    std::uint64_t seed = 42;
    int threads = 0;
    app.add_option("--out", out_path, "output blade config path");
    app.add_option("--budget", budget, "random search candidates");
    app.add_option("--refine", refine_iters, "coordinate-descent iterations");
    app.add_option("--seed", seed, "search seed");
    app.add_option("--threads", threads, "worker threads (0 = auto)");
    CLI11_PARSE(app, argc, argv);

    std::vector<Params> candidates(static_cast<std::size_t>(budget));
    std::vector<Evaluation> evals(static_cast<std::size_t>(budget));
    for (int i = 0; i < budget; ++i) {
        Rng rng(derive_seed(seed, 0xca11b7a7e, static_cast<std::uint64_t>(i)));
        candidates[static_cast<std::size_t>(i)] = random_params(rng);
    }
    parallel_for(static_cast<std::size_t>(budget), threads,
                 [&](std::size_t i) { evals[i] = evaluate(candidates[i]); });

    std::size_t best = 0;
    for (std::size_t i = 1; i < evals.size(); ++i)
        if (evals[i].score < evals[best].score) best = i;
    Params best_params = candidates[best];
    Evaluation best_eval = evals[best];
    std::printf("random search best score %.5f (feasible=%d)\n", best_eval.score, best_eval.feasible ? 1 : 0);

    // multiplicative coordinate descent with shrinking step
    Rng rng(derive_seed(seed, 0x5ef1e3));
    double step = 0.20;
    std::array<double Params::*, 9> fields = {&Params::h0, &Params::h_knot_frac, &Params::h_tip_frac,
                                              &Params::z_knot_h, &Params::b0, &Params::b_knot_frac,
                                              &Params::b_tip_frac, &Params::z_knot_b, &Params::twist_root_deg};
    for (int it = 0; it < refine_iters; ++it) {
        Params trial = best_params;
        auto field = fields[rng.next_below(fields.size())];
        trial.*field *= 1.0 + step * (2.0 * rng.next_double() - 1.0);
        clamp_params(trial);
        Evaluation ev = evaluate(trial);
        if (ev.score < best_eval.score) {
            best_params = trial;
            best_eval = ev;
        }
        if (it % 200 == 199) step = std::max(0.02, step * 0.7);
    }

    std::printf("refined score %.5f (feasible=%d)\n", best_eval.score, best_eval.feasible ? 1 : 0);
    std::printf("frequencies:");
    for (int m = 0; m < 6; ++m)
        std::printf(" %.2f (target %.1f, %+.1f%%)", best_eval.freqs[static_cast<std::size_t>(m)],
                    kTargetsHz[static_cast<std::size_t>(m)],
                    100.0 * (best_eval.freqs[static_cast<std::size_t>(m)] - kTargetsHz[static_cast<std::size_t>(m)]) /
                        kTargetsHz[static_cast<std::size_t>(m)]);
    std::printf("\nparams: h0=%.5f hk=%.3f ht=%.3f zh=%.3f b0=%.5f bk=%.3f bt=%.3f zb=%.3f twist=%.1f\n",
                best_params.h0, best_params.h_knot_frac, best_params.h_tip_frac, best_params.z_knot_h,
                best_params.b0, best_params.b_knot_frac, best_params.b_tip_frac, best_params.z_knot_b,
                best_params.twist_root_deg);

    if (!best_eval.feasible)
        std::printf("WARNING: best candidate violates at least one calibration constraint\n");

    auto cfg = build_config(best_params);
    cfg::save_json_file(out_path, cfg::to_json(cfg));
    std::printf("wrote %s (blade mass %.4f kg, sensor mass %.4f kg)\n", out_path.c_str(), fem::blade_mass(cfg),
                cfg.sensor_point_mass_kg);
    return best_eval.feasible ? 0 : 1;
}
