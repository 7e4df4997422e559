#ifndef BLADEFD_SIM_HPP
#define BLADEFD_SIM_HPP

#include "bladefd/fem.hpp"
#include "bladefd/parallel.hpp"
#include "bladefd/rng.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace bladefd::sim {

enum class ImpulseShape { HalfSine };

struct ImpulseSpec {
    double peak_force_n = 40.0;
    double duration_s = 1.5e-4;
    double onset_time_s = 0.0;
    ImpulseShape shape = ImpulseShape::HalfSine;

    void validate() const {
        if (!(peak_force_n > 0.0)) throw std::invalid_argument("impulse: peak force must be positive");
        if (!(duration_s >= 1e-5 && duration_s <= 1e-3))
            throw std::invalid_argument("impulse: duration must be in [10 us, 1 ms]");
        if (onset_time_s < 0.0) throw std::invalid_argument("impulse: negative onset");
    }
};

/// Continuous half-sine force value at time t.
inline double half_sine_value(const ImpulseSpec& spec, double t) {
    double tau = t - spec.onset_time_s;
    if (tau <= 0.0 || tau >= spec.duration_s) return 0.0;
    return spec.peak_force_n * std::sin(fem::kPi * tau / spec.duration_s);
}

/// Point samples of the half-sine pulse on the uniform grid t_j = j / fs.
/// The pulse must span at least 1.5 sample intervals so the sampled waveform
/// carries its energy; shorter pulses degenerate to a single spike.
inline std::vector<double> half_sine_impulse(const ImpulseSpec& spec, double sample_rate, double total_duration) {
    spec.validate();
    if (!(sample_rate > 0.0)) throw std::invalid_argument("impulse: sample rate must be positive");
    if (spec.duration_s * sample_rate < 1.5)
        throw std::invalid_argument("impulse: pulse shorter than 1.5 sample intervals at this rate");
    if (spec.onset_time_s + spec.duration_s > total_duration)
        throw std::invalid_argument("impulse: pulse does not fit in the requested duration");
    auto n = static_cast<std::size_t>(std::llround(total_duration * sample_rate));
    std::vector<double> force(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) force[j] = half_sine_value(spec, static_cast<double>(j) / sample_rate);
    return force;
}

namespace detail {

/// One underdamped SDOF mode advanced with the exact solution for a force
/// that is linear within each step (ramp-invariant discretization).
class SdofPropagator {
public:
    SdofPropagator(double omega, double zeta, double dt)
        : w_(omega), z_(zeta), a_(zeta * omega), wd_(omega * std::sqrt(1.0 - zeta * zeta)),
          h_(dt), e_(std::exp(-zeta * omega * dt)), c_(std::cos(wd_ * dt)), s_(std::sin(wd_ * dt)) {}

    /// Advances state under load p0 -> p1 across the step.
    void step(double p0, double p1) {
        double beta = (p1 - p0) / (h_ * w_ * w_);
        double alpha = p0 / (w_ * w_) - 2.0 * z_ * beta / w_;
        double c1 = q_ - alpha;
        double c2 = (v_ - beta + a_ * c1) / wd_;
        double osc = c1 * c_ + c2 * s_;
        double q_next = e_ * osc + alpha + beta * h_;
        double v_next = e_ * (-a_ * osc + wd_ * (c2 * c_ - c1 * s_)) + beta;
        q_ = q_next;
        v_ = v_next;
    }

    double accel(double p) const { return p - 2.0 * a_ * v_ - w_ * w_ * q_; }

private:
    double w_, z_, a_, wd_, h_, e_, c_, s_;
    double q_ = 0.0, v_ = 0.0;
};

} // namespace detail

/// Sensor-axis acceleration by modal superposition: each retained mode is an
/// underdamped SDOF forced by its shape value at the impact dof, advanced
/// with the exact piecewise-linear-force propagator, then recombined through
/// the shape values at the sensor dof. Exact zeros before the pulse onset.
inline std::vector<double> modal_transient(const fem::ModalResult& modal, const fem::BladeConfig& config,
                                           const ImpulseSpec& impulse, double sample_rate, double duration) {
    if (modal.n_modes() < 1) throw std::invalid_argument("transient: no modes retained");
    if (!(duration >= 0.1)) throw std::invalid_argument("transient: duration must be at least 0.1 s");
    double f_max = modal.frequencies_hz.back();
    if (sample_rate < 4.0 * f_max)
        throw std::invalid_argument("transient: sample rate below 4x the highest retained mode (" +
                                    std::to_string(f_max) + " Hz)");
    for (double z : modal.damping_ratios)
        if (!(z > 0.0 && z < 1.0)) throw std::invalid_argument("transient: modes must be underdamped (0 < zeta < 1)");

    std::vector<double> force = half_sine_impulse(impulse, sample_rate, duration);
    const int sensor = fem::detail::nearest_node(config, config.sensor_position_m);
    const int impact = fem::detail::nearest_node(config, config.impact_position_m);

    const int n_modes = modal.n_modes();
    const double dt = 1.0 / sample_rate;
    std::vector<double> accel(force.size(), 0.0);
    for (int m = 0; m < n_modes; ++m) {
        double omega = 2.0 * fem::kPi * modal.frequencies_hz[static_cast<std::size_t>(m)];
        double phi_imp = modal.mode_shapes(4 * impact + 0, m);
        double phi_sen = modal.mode_shapes(4 * sensor + 0, m);
        detail::SdofPropagator sdof(omega, modal.damping_ratios[static_cast<std::size_t>(m)], dt);
        accel[0] += phi_sen * sdof.accel(phi_imp * force[0]);
        for (std::size_t k = 1; k < force.size(); ++k) {
            sdof.step(phi_imp * force[k - 1], phi_imp * force[k]);
            accel[k] += phi_sen * sdof.accel(phi_imp * force[k]);
        }
    }
    return accel;
}

struct ProtocolSpec {
    int n_units_per_class = 5;
    int n_trials_per_unit = 20;
    double pre_trigger_s = 0.5;
    double capture_s = 5.0;
    double sample_rate_hz = 10000.0;
    double impact_peak_min_n = 30.0;
    double impact_peak_max_n = 50.0;
    double impulse_duration_s = 1.5e-4;
    double unit_variability = 0.003;     // relative stdev of per-unit section stiffness scatter
    double noise_snr_db = 30.0;          // +inf disables the sensor noise
    int n_modes = 6;
    std::uint64_t master_seed = 1;

    double record_duration() const { return pre_trigger_s + capture_s; }
    std::size_t samples_per_trial() const {
        return static_cast<std::size_t>(std::llround(record_duration() * sample_rate_hz));
    }

    void validate() const {
        if (n_units_per_class < 1 || n_trials_per_unit < 1)
            throw std::invalid_argument("protocol: unit and trial counts must be at least 1");
        if (!(pre_trigger_s >= 0.0 && capture_s > 0.0))
            throw std::invalid_argument("protocol: capture window must be positive");
        if (!(sample_rate_hz >= 2000.0))
            throw std::invalid_argument("protocol: sample rate must be at least 2 kHz");
        if (!(impact_peak_min_n > 0.0 && impact_peak_max_n >= impact_peak_min_n))
            throw std::invalid_argument("protocol: impact peak range must be positive and ordered");
        if (!(unit_variability >= 0.0)) throw std::invalid_argument("protocol: negative unit variability");
        if (n_modes < 1) throw std::invalid_argument("protocol: need at least one mode");
    }
};

struct TrialRecord {
    std::string label;
    int unit_id = 0;
    int trial_id = 0;
    double sample_rate_hz = 0.0;
    std::vector<double> time_s;
    std::vector<double> force_n;
    std::vector<double> accel_ms2;

    void validate() const {
        if (time_s.size() != force_n.size() || time_s.size() != accel_ms2.size())
            throw std::invalid_argument("trial: channel lengths differ");
        if (!(sample_rate_hz >= 2000.0)) throw std::invalid_argument("trial: sample rate below 2 kHz");
        if (!time_s.empty() && time_s.front() != 0.0)
            throw std::invalid_argument("trial: time must start at 0");
        for (std::size_t i = 1; i < time_s.size(); ++i)
            if (!(time_s[i] > time_s[i - 1])) throw std::invalid_argument("trial: time not monotone");
    }
};

namespace seed_stream {
inline constexpr std::uint64_t kUnitStiffness = 0x73746966666eULL;  // "stiffn"
inline constexpr std::uint64_t kImpact = 0x696d70616374ULL;         // "impact"
inline constexpr std::uint64_t kNoise = 0x6e6f697365ULL;            // "noise"
} // namespace seed_stream

/// Per-unit multiplicative stiffness scatter, one factor per section of the
/// healthy config. Frozen by (master seed, label, unit): trials of a unit
/// share it, different units and classes do not.
inline std::vector<double> unit_stiffness_factors(const ProtocolSpec& protocol, const std::string& label,
                                                  int unit_id, std::size_t n_sections) {
    Rng rng(derive_seed(protocol.master_seed, seed_stream::kUnitStiffness, fnv1a(label),
                        static_cast<std::uint64_t>(unit_id)));
    std::vector<double> factors(n_sections, 1.0);
    for (auto& f : factors) {
        f = 1.0 + protocol.unit_variability * rng.gaussian();
        f = std::max(f, 0.5);   // print scatter is per-mill scale; keep pathological draws physical
    }
    return factors;
}

/// The frozen, damaged model of one physical blade unit.
struct UnitModel {
    fem::BladeConfig config;    // perturbed + damaged
    fem::ModalResult modal;
};

inline UnitModel make_unit_model(const fem::BladeConfig& config, const fem::DamageSpec& damage,
                                 const ProtocolSpec& protocol, int unit_id,
                                 std::vector<std::string>* warnings = nullptr) {
    fem::BladeConfig unit_cfg = config;
    auto factors = unit_stiffness_factors(protocol, damage.label, unit_id, config.sections.size());
    for (std::size_t s = 0; s < unit_cfg.sections.size(); ++s) {
        unit_cfg.sections[s].i_flap_m4 *= factors[s];
        unit_cfg.sections[s].i_edge_m4 *= factors[s];
    }
    UnitModel model;
    model.config = fem::apply_damage(unit_cfg, damage, warnings);
    model.modal = fem::solve_modes(fem::build_system(model.config), protocol.n_modes);
    return model;
}

/// One hammer test on a frozen unit model: per-trial impact peak drawn from
/// the protocol range, pre-trigger quiet zone, modal-superposition response,
/// white Gaussian sensor noise at the requested SNR (relative to the RMS of
/// the noiseless record). Deterministic per (seed, label, unit, trial).
inline TrialRecord synth_trial(const UnitModel& model, const ProtocolSpec& protocol, const std::string& label,
                               int unit_id, int trial_id) {
    protocol.validate();

    Rng impact_rng(derive_seed(protocol.master_seed, seed_stream::kImpact, fnv1a(label),
                               static_cast<std::uint64_t>(unit_id), static_cast<std::uint64_t>(trial_id)));
    ImpulseSpec impulse;
    impulse.peak_force_n = impact_rng.uniform(protocol.impact_peak_min_n, protocol.impact_peak_max_n);
    impulse.duration_s = protocol.impulse_duration_s;
    impulse.onset_time_s = protocol.pre_trigger_s;

    TrialRecord trial;
    trial.label = label;
    trial.unit_id = unit_id;
    trial.trial_id = trial_id;
    trial.sample_rate_hz = protocol.sample_rate_hz;
    trial.force_n = half_sine_impulse(impulse, protocol.sample_rate_hz, protocol.record_duration());
    trial.accel_ms2 =
        modal_transient(model.modal, model.config, impulse, protocol.sample_rate_hz, protocol.record_duration());

    std::size_t n = trial.force_n.size();
    trial.time_s.resize(n);
    for (std::size_t j = 0; j < n; ++j) trial.time_s[j] = static_cast<double>(j) / protocol.sample_rate_hz;

    if (std::isfinite(protocol.noise_snr_db)) {
        double rms = 0.0;
        for (double a : trial.accel_ms2) rms += a * a;
        rms = std::sqrt(rms / static_cast<double>(n));
        double sigma = rms * std::pow(10.0, -protocol.noise_snr_db / 20.0);
        Rng noise_rng(derive_seed(protocol.master_seed, seed_stream::kNoise, fnv1a(label),
                                  static_cast<std::uint64_t>(unit_id), static_cast<std::uint64_t>(trial_id)));
        for (double& a : trial.accel_ms2) a += sigma * noise_rng.gaussian();
    }
    return trial;
}

inline TrialRecord synth_trial(const fem::BladeConfig& config, const fem::DamageSpec& damage,
                               const ProtocolSpec& protocol, int unit_id, int trial_id) {
    return synth_trial(make_unit_model(config, damage, protocol, unit_id), protocol, damage.label, unit_id,
                       trial_id);
}

/// Generates every (label, unit, trial) combination and hands each finished
/// record to `sink`. Trials of a unit share one eigensolve; trial synthesis
/// runs in parallel and the output set is identical for any thread count.
/// `sink` must tolerate concurrent calls for distinct trials.
inline void synth_dataset(const fem::BladeConfig& config, const std::vector<fem::DamageSpec>& damages,
                          const ProtocolSpec& protocol, int threads,
                          const std::function<void(const TrialRecord&)>& sink,
                          std::vector<std::string>* warnings = nullptr) {
    protocol.validate();
    config.validate();
    if (damages.empty()) throw std::invalid_argument("dataset: no damage classes given");
    std::set<std::string> labels;
    for (const auto& d : damages)
        if (!labels.insert(d.label).second)
            throw std::invalid_argument("dataset: duplicate class label '" + d.label + "'");

    for (const auto& damage : damages) {
        for (int unit = 1; unit <= protocol.n_units_per_class; ++unit) {
            UnitModel model = make_unit_model(config, damage, protocol, unit, warnings);
            parallel_for(static_cast<std::size_t>(protocol.n_trials_per_unit), threads, [&](std::size_t t) {
                sink(synth_trial(model, protocol, damage.label, unit, static_cast<int>(t) + 1));
            });
        }
    }
}

} // namespace bladefd::sim

#endif
