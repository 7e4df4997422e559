#ifndef BLADEFD_CONFIG_HPP
#define BLADEFD_CONFIG_HPP

#include "bladefd/fem.hpp"
#include "bladefd/rng.hpp"
#include "bladefd/sim.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

/// Human-editable JSON configs. Field names carry units (length_m,
/// sample_rate_hz, ...); every loader validates and reports the offending
/// file. Serialization is canonical (sorted keys) so configs can be
/// fingerprinted.
namespace bladefd::cfg {

using json = nlohmann::json;

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }
    return j;
}

inline void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << j.dump(2) << "\n";
}

// --- blade config -----------------------------------------------------------

inline json to_json(const fem::MaterialProps& m) {
    return json{{"density_kgm3", m.density_kgm3},
                {"youngs_modulus_pa", m.youngs_modulus_pa},
                {"poisson_ratio", m.poisson_ratio},
                {"modal_damping_ratio", m.modal_damping_ratio}};
}

inline fem::MaterialProps material_from_json(const json& j) {
    fem::MaterialProps m;
    m.density_kgm3 = j.at("density_kgm3").get<double>();
    m.youngs_modulus_pa = j.at("youngs_modulus_pa").get<double>();
    m.poisson_ratio = j.at("poisson_ratio").get<double>();
    m.modal_damping_ratio = j.at("modal_damping_ratio").get<double>();
    return m;
}

inline json to_json(const fem::BladeConfig& c) {
    json sections = json::array();
    for (const auto& s : c.sections)
        sections.push_back(json{{"span_start_m", s.span_start_m},
                                {"span_end_m", s.span_end_m},
                                {"area_m2", s.area_m2},
                                {"i_flap_m4", s.i_flap_m4},
                                {"i_edge_m4", s.i_edge_m4},
                                {"twist_rad", s.twist_rad}});
    return json{{"schema", "bladefd/blade/v1"},
                {"length_m", c.length_m},
                {"n_elements", c.n_elements},
                {"clamp_length_m", c.clamp_length_m},
                {"sensor_position_m", c.sensor_position_m},
                {"impact_position_m", c.impact_position_m},
                {"sensor_point_mass_kg", c.sensor_point_mass_kg},
                {"material", to_json(c.material)},
                {"sections", sections}};
}

inline fem::BladeConfig blade_from_json(const json& j) {
    if (j.value("schema", "") != "bladefd/blade/v1")
        throw std::runtime_error("blade config: unknown or missing schema tag");
    fem::BladeConfig c;
    c.length_m = j.at("length_m").get<double>();
    c.n_elements = j.at("n_elements").get<int>();
    c.clamp_length_m = j.at("clamp_length_m").get<double>();
    c.sensor_position_m = j.at("sensor_position_m").get<double>();
    c.impact_position_m = j.at("impact_position_m").get<double>();
    c.sensor_point_mass_kg = j.value("sensor_point_mass_kg", 0.0);
    c.material = material_from_json(j.at("material"));
    for (const auto& js : j.at("sections")) {
        fem::SectionProps s;
        s.span_start_m = js.at("span_start_m").get<double>();
        s.span_end_m = js.at("span_end_m").get<double>();
        s.area_m2 = js.at("area_m2").get<double>();
        s.i_flap_m4 = js.at("i_flap_m4").get<double>();
        s.i_edge_m4 = js.at("i_edge_m4").get<double>();
        s.twist_rad = js.value("twist_rad", 0.0);
        c.sections.push_back(s);
    }
    c.validate();
    return c;
}

inline fem::BladeConfig load_blade_config(const std::string& path) {
    try {
        return blade_from_json(load_json_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error("blade config " + path + ": " + e.what());
    }
}

// --- damage catalog ----------------------------------------------------------

inline std::string kind_name(fem::DamageKind k) {
    switch (k) {
        case fem::DamageKind::None: return "none";
        case fem::DamageKind::TransverseCrack: return "transverse_crack";
        case fem::DamageKind::MassRemoval: return "mass_removal";
    }
    return "none";
}

inline fem::DamageKind kind_from_name(const std::string& name) {
    if (name == "none") return fem::DamageKind::None;
    if (name == "transverse_crack") return fem::DamageKind::TransverseCrack;
    if (name == "mass_removal") return fem::DamageKind::MassRemoval;
    throw std::runtime_error("damage catalog: unknown kind '" + name + "'");
}

inline json to_json(const fem::DamageSpec& d) {
    json j{{"label", d.label}, {"kind", kind_name(d.kind)}};
    if (d.kind != fem::DamageKind::None) {
        j["position_m"] = d.position_m;
        j["length_m"] = d.length_m;
        j["thickness_m"] = d.thickness_m;
        if (d.kind == fem::DamageKind::TransverseCrack) j["depth_ratio"] = d.depth_ratio;
        if (d.kind == fem::DamageKind::MassRemoval) j["mass_fraction"] = d.mass_fraction;
    }
    return j;
}

inline fem::DamageSpec damage_from_json(const json& j) {
    fem::DamageSpec d;
    d.label = j.at("label").get<std::string>();
    d.kind = kind_from_name(j.at("kind").get<std::string>());
    if (d.kind != fem::DamageKind::None) {
        d.position_m = j.at("position_m").get<double>();
        d.length_m = j.at("length_m").get<double>();
        d.thickness_m = j.value("thickness_m", 0.0);
        d.depth_ratio = j.value("depth_ratio", 0.0);
        d.mass_fraction = j.value("mass_fraction", 0.0);
    }
    return d;
}

inline json to_json(const std::vector<fem::DamageSpec>& catalog) {
    json j = json::array();
    for (const auto& d : catalog) j.push_back(to_json(d));
    return json{{"schema", "bladefd/damages/v1"}, {"classes", j}};
}

inline std::vector<fem::DamageSpec> damages_from_json(const json& j) {
    if (j.value("schema", "") != "bladefd/damages/v1")
        throw std::runtime_error("damage catalog: unknown or missing schema tag");
    std::vector<fem::DamageSpec> catalog;
    for (const auto& jd : j.at("classes")) catalog.push_back(damage_from_json(jd));
    return catalog;
}

inline std::vector<fem::DamageSpec> load_damage_catalog(const std::string& path) {
    try {
        return damages_from_json(load_json_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error("damage catalog " + path + ": " + e.what());
    }
}

// --- protocol ----------------------------------------------------------------

inline json to_json(const sim::ProtocolSpec& p) {
    json j{{"schema", "bladefd/protocol/v1"},
           {"n_units_per_class", p.n_units_per_class},
           {"n_trials_per_unit", p.n_trials_per_unit},
           {"pre_trigger_s", p.pre_trigger_s},
           {"capture_s", p.capture_s},
           {"sample_rate_hz", p.sample_rate_hz},
           {"impact_peak_min_n", p.impact_peak_min_n},
           {"impact_peak_max_n", p.impact_peak_max_n},
           {"impulse_duration_s", p.impulse_duration_s},
           {"unit_variability", p.unit_variability},
           {"n_modes", p.n_modes},
           {"master_seed", p.master_seed}};
    if (std::isfinite(p.noise_snr_db))
        j["noise_snr_db"] = p.noise_snr_db;
    else
        j["noise_snr_db"] = nullptr;   // null disables sensor noise
    return j;
}

inline sim::ProtocolSpec protocol_from_json(const json& j) {
    if (j.value("schema", "") != "bladefd/protocol/v1")
        throw std::runtime_error("protocol: unknown or missing schema tag");
    sim::ProtocolSpec p;
    p.n_units_per_class = j.at("n_units_per_class").get<int>();
    p.n_trials_per_unit = j.at("n_trials_per_unit").get<int>();
    p.pre_trigger_s = j.at("pre_trigger_s").get<double>();
    p.capture_s = j.at("capture_s").get<double>();
    p.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    p.impact_peak_min_n = j.at("impact_peak_min_n").get<double>();
    p.impact_peak_max_n = j.at("impact_peak_max_n").get<double>();
    p.impulse_duration_s = j.value("impulse_duration_s", 1.5e-4);
    p.unit_variability = j.value("unit_variability", 0.003);
    if (j.contains("noise_snr_db") && !j.at("noise_snr_db").is_null())
        p.noise_snr_db = j.at("noise_snr_db").get<double>();
    else
        p.noise_snr_db = std::numeric_limits<double>::infinity();
    p.n_modes = j.value("n_modes", 6);
    p.master_seed = j.value("master_seed", std::uint64_t{1});
    p.validate();
    return p;
}

inline sim::ProtocolSpec load_protocol(const std::string& path) {
    try {
        return protocol_from_json(load_json_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error("protocol " + path + ": " + e.what());
    }
}

// --- pipeline knobs ----------------------------------------------------------

struct PipelineParams {
    double window_s = 2.0;
    int filter_order = 4;
    double cutoff_hz = 1000.0;
    double onset_threshold = 0.05;     // fraction of the force maximum
    double half_band_hz = 15.0;
    int zero_pad_factor = 4;
    double anova_alpha = 0.05;
    double train_fraction = 0.7;
    bool stratified = true;
    std::uint64_t split_seed = 7;
    std::uint64_t rf_seed = 11;
    int rf_trees = 100;
    int knn_k = 5;
    double svm_c = 1.0;

    void validate() const {
        if (!(window_s > 0.0)) throw std::invalid_argument("pipeline: window must be positive");
        if (filter_order < 1 || filter_order > 12) throw std::invalid_argument("pipeline: bad filter order");
        if (!(cutoff_hz > 0.0)) throw std::invalid_argument("pipeline: bad cutoff");
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw std::invalid_argument("pipeline: train fraction must be in (0, 1)");
        if (!(anova_alpha > 0.0 && anova_alpha < 1.0)) throw std::invalid_argument("pipeline: bad alpha");
        if (zero_pad_factor < 1) throw std::invalid_argument("pipeline: bad zero-pad factor");
        if (knn_k < 1 || rf_trees < 1 || !(svm_c > 0.0)) throw std::invalid_argument("pipeline: bad model params");
    }
};

inline json to_json(const PipelineParams& p) {
    return json{{"schema", "bladefd/pipeline/v1"},
                {"window_s", p.window_s},
                {"filter_order", p.filter_order},
                {"cutoff_hz", p.cutoff_hz},
                {"onset_threshold", p.onset_threshold},
                {"half_band_hz", p.half_band_hz},
                {"zero_pad_factor", p.zero_pad_factor},
                {"anova_alpha", p.anova_alpha},
                {"train_fraction", p.train_fraction},
                {"stratified", p.stratified},
                {"split_seed", p.split_seed},
                {"rf_seed", p.rf_seed},
                {"rf_trees", p.rf_trees},
                {"knn_k", p.knn_k},
                {"svm_c", p.svm_c}};
}

inline PipelineParams pipeline_from_json(const json& j) {
    if (j.value("schema", "") != "bladefd/pipeline/v1")
        throw std::runtime_error("pipeline config: unknown or missing schema tag");
    PipelineParams p;
    p.window_s = j.value("window_s", p.window_s);
    p.filter_order = j.value("filter_order", p.filter_order);
    p.cutoff_hz = j.value("cutoff_hz", p.cutoff_hz);
    p.onset_threshold = j.value("onset_threshold", p.onset_threshold);
    p.half_band_hz = j.value("half_band_hz", p.half_band_hz);
    p.zero_pad_factor = j.value("zero_pad_factor", p.zero_pad_factor);
    p.anova_alpha = j.value("anova_alpha", p.anova_alpha);
    p.train_fraction = j.value("train_fraction", p.train_fraction);
    p.stratified = j.value("stratified", p.stratified);
    p.split_seed = j.value("split_seed", p.split_seed);
    p.rf_seed = j.value("rf_seed", p.rf_seed);
    p.rf_trees = j.value("rf_trees", p.rf_trees);
    p.knn_k = j.value("knn_k", p.knn_k);
    p.svm_c = j.value("svm_c", p.svm_c);
    p.validate();
    return p;
}

inline PipelineParams load_pipeline_params(const std::string& path) {
    try {
        return pipeline_from_json(load_json_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error("pipeline config " + path + ": " + e.what());
    }
}

/// Fingerprint of a config object: FNV-1a over the canonical (sorted-key,
/// compact) JSON dump. Stable across platforms for identical content.
inline std::string digest(const json& j) {
    std::uint64_t h = fnv1a(j.dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace bladefd::cfg

#endif
