#ifndef BLADEFD_FEM_HPP
#define BLADEFD_FEM_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace bladefd::fem {

inline constexpr double kPi = 3.14159265358979323846;

struct MaterialProps {
    double density_kgm3 = 1124.6;
    double youngs_modulus_pa = 2.55e9;
    double poisson_ratio = 0.35;        // stored for completeness; Euler-Bernoulli kinematics do not use it
    double modal_damping_ratio = 0.015;

    void validate() const {
        if (!(density_kgm3 > 0.0)) throw std::invalid_argument("material: density must be positive");
        if (!(youngs_modulus_pa > 0.0)) throw std::invalid_argument("material: Young's modulus must be positive");
        if (!(poisson_ratio > 0.0 && poisson_ratio < 0.5))
            throw std::invalid_argument("material: Poisson ratio must be in (0, 0.5)");
        if (!(modal_damping_ratio > 0.0 && modal_damping_ratio < 1.0))
            throw std::invalid_argument("material: damping ratio must be in (0, 1)");
    }
};

/// One piecewise-constant span segment of the blade. i_flap is the bending
/// inertia for deflection along x (the sensing axis), i_edge along y, both
/// about the section's principal axes; twist rotates those axes.
struct SectionProps {
    double span_start_m = 0.0;
    double span_end_m = 0.0;
    double area_m2 = 0.0;
    double i_flap_m4 = 0.0;
    double i_edge_m4 = 0.0;
    double twist_rad = 0.0;
};

struct BladeConfig {
    double length_m = 0.300;
    int n_elements = 60;
    std::vector<SectionProps> sections;
    MaterialProps material;
    double clamp_length_m = 0.020;
    double sensor_position_m = 0.100;
    double impact_position_m = 0.065;
    double sensor_point_mass_kg = 0.0;

    void validate() const {
        material.validate();
        if (!(length_m > 0.0)) throw std::invalid_argument("config: length must be positive");
        if (n_elements < 8) throw std::invalid_argument("config: need at least 8 elements");
        if (!(clamp_length_m >= 0.0 && clamp_length_m < length_m))
            throw std::invalid_argument("config: clamp zone must not cover the whole blade");
        if (!(impact_position_m > clamp_length_m && impact_position_m < length_m))
            throw std::invalid_argument("config: impact position must lie on the free span");
        if (!(sensor_position_m > clamp_length_m && sensor_position_m < length_m))
            throw std::invalid_argument("config: sensor position must lie on the free span");
        if (sensor_point_mass_kg < 0.0)
            throw std::invalid_argument("config: sensor mass must be non-negative");
        if (sections.empty()) throw std::invalid_argument("config: no sections");
        double cursor = 0.0;
        for (std::size_t i = 0; i < sections.size(); ++i) {
            const auto& s = sections[i];
            if (!(s.span_end_m > s.span_start_m))
                throw std::invalid_argument("config: section " + std::to_string(i) + " has non-positive span");
            if (std::abs(s.span_start_m - cursor) > 1e-9 * length_m)
                throw std::invalid_argument("config: sections leave a gap before section " + std::to_string(i));
            if (!(s.area_m2 > 0.0 && s.i_flap_m4 > 0.0 && s.i_edge_m4 > 0.0))
                throw std::invalid_argument("config: non-physical section " + std::to_string(i) +
                                            " (zero or negative area/inertia)");
            cursor = s.span_end_m;
        }
        if (std::abs(cursor - length_m) > 1e-9 * length_m)
            throw std::invalid_argument("config: sections do not cover the full span");
    }
};

enum class DamageKind { None, TransverseCrack, MassRemoval };

/// Damage catalog entry. Cracks reduce bending stiffness over their axial
/// footprint and leave mass alone; mass removal does the opposite.
struct DamageSpec {
    std::string label = "healthy";
    DamageKind kind = DamageKind::None;
    double position_m = 0.0;
    double length_m = 0.0;
    double thickness_m = 0.0;   // geometric descriptor only; no stiffness role in the beam surrogate
    double depth_ratio = 0.0;
    double mass_fraction = 0.0;

    void validate(double blade_length) const {
        if (kind == DamageKind::None) return;
        if (!(position_m >= 0.0 && position_m + length_m <= blade_length + 1e-12))
            throw std::invalid_argument("damage '" + label + "': footprint outside blade span");
        if (!(length_m > 0.0)) throw std::invalid_argument("damage '" + label + "': zero-length footprint");
        if (kind == DamageKind::TransverseCrack) {
            if (depth_ratio >= 1.0)
                throw std::invalid_argument("damage '" + label +
                                            "': depth_ratio = 1 (fully severed section) is not modeled");
            if (depth_ratio < 0.0) throw std::invalid_argument("damage '" + label + "': negative depth_ratio");
        } else {
            if (!(mass_fraction >= 0.0 && mass_fraction <= 0.1))
                throw std::invalid_argument("damage '" + label + "': mass_fraction must be in [0, 0.1]");
        }
    }
};

/// Reduced stiffness/mass matrices with the clamped-root boundary applied.
/// DOF layout: 4 per free node, ordered (u_x, theta_y, u_y, theta_x); nodes
/// on a uniform grid z_k = k * length / n_elements.
struct AssembledSystem {
    Eigen::MatrixXd k_mat;           // free x free
    Eigen::MatrixXd m_mat;           // free x free
    std::vector<double> node_z;      // all nodes, including clamped
    std::vector<int> free_dof_of_full;  // full dof index -> reduced index, -1 if clamped
    int n_clamped_nodes = 0;
    int sensor_node = 0;
    int impact_node = 0;
    double m_full_trace = 0.0;       // trace of the unconstrained mass matrix (diagnostic)
    double modal_damping_ratio = 0.0;   // carried from the material for solve_modes

    int n_nodes() const { return static_cast<int>(node_z.size()); }
    int n_free_dofs() const { return static_cast<int>(k_mat.rows()); }
    /// Reduced index of (node, component) where component 0..3 follows the dof layout.
    int dof(int node, int comp) const {
        int idx = free_dof_of_full[static_cast<std::size_t>(4 * node + comp)];
        if (idx < 0) throw std::invalid_argument("dof: node " + std::to_string(node) + " is clamped");
        return idx;
    }
    int sensor_dof_x() const { return dof(sensor_node, 0); }
    int impact_dof_x() const { return dof(impact_node, 0); }
};

struct ModalResult {
    std::vector<double> frequencies_hz;       // ascending
    std::vector<double> damping_ratios;
    Eigen::MatrixXd mode_shapes;              // (4 * n_nodes) x n_modes, zeros at clamped dofs
    std::string dof_layout = "per node: (u_x, theta_y, u_y, theta_x); nodes at z_k = k*L/n_elements";

    int n_modes() const { return static_cast<int>(frequencies_hz.size()); }
};

inline double blade_mass(const BladeConfig& config) {
    double m = 0.0;
    for (const auto& s : config.sections)
        m += config.material.density_kgm3 * s.area_m2 * (s.span_end_m - s.span_start_m);
    return m;
}

namespace detail {

/// 4x4 Hermite bending stiffness pattern for unit EI, dofs (u1, t1, u2, t2).
inline Eigen::Matrix4d bending_stiffness_pattern(double le) {
    Eigen::Matrix4d k;
    double l2 = le * le, l3 = l2 * le;
    k << 12.0 / l3, 6.0 / l2, -12.0 / l3, 6.0 / l2,
         6.0 / l2, 4.0 / le, -6.0 / l2, 2.0 / le,
         -12.0 / l3, -6.0 / l2, 12.0 / l3, -6.0 / l2,
         6.0 / l2, 2.0 / le, -6.0 / l2, 4.0 / le;
    return k;
}

/// Consistent mass pattern for unit rho*A, same dof order.
inline Eigen::Matrix4d bending_mass_pattern(double le) {
    Eigen::Matrix4d m;
    double l2 = le * le;
    m << 156.0, 22.0 * le, 54.0, -13.0 * le,
         22.0 * le, 4.0 * l2, 13.0 * le, -3.0 * l2,
         54.0, 13.0 * le, 156.0, -22.0 * le,
         -13.0 * le, -3.0 * l2, -22.0 * le, 4.0 * l2;
    return m * (le / 420.0);
}

struct ElementProps {
    double area;
    double ixx, iyy, ixy;   // section inertia tensor in blade axes, averaged over the element
};

/// Integral mean of the piecewise-constant section properties over one
/// element. Averaging the rotated inertia tensor (not the principal values)
/// keeps K monotone under section-wise stiffness reductions.
inline ElementProps element_props(const BladeConfig& config, double z0, double z1) {
    ElementProps p{0.0, 0.0, 0.0, 0.0};
    double covered = 0.0;
    for (const auto& s : config.sections) {
        double lo = std::max(z0, s.span_start_m);
        double hi = std::min(z1, s.span_end_m);
        if (hi <= lo) continue;
        double w = hi - lo;
        double c = std::cos(s.twist_rad), sn = std::sin(s.twist_rad);
        p.area += w * s.area_m2;
        p.ixx += w * (s.i_flap_m4 * c * c + s.i_edge_m4 * sn * sn);
        p.iyy += w * (s.i_flap_m4 * sn * sn + s.i_edge_m4 * c * c);
        p.ixy += w * (s.i_flap_m4 - s.i_edge_m4) * c * sn;
        covered += w;
    }
    double le = z1 - z0;
    if (covered < le * (1.0 - 1e-9))
        throw std::invalid_argument("element spans a gap in the section table");
    p.area /= le;
    p.ixx /= le;
    p.iyy /= le;
    p.ixy /= le;
    return p;
}

inline int nearest_node(const BladeConfig& config, double position) {
    double h = config.length_m / config.n_elements;
    int node = static_cast<int>(std::lround(position / h));
    return std::clamp(node, 0, config.n_elements);
}

} // namespace detail

/// Assembles the clamped two-plane bending model: cubic Hermite elements
/// with 4 dofs per node, per-element twist coupling the x and y planes
/// through the product of inertia, the sensor's accelerometer modeled as an
/// optional lumped translational mass at the node closest to the sensor.
inline AssembledSystem build_system(const BladeConfig& config) {
    config.validate();

    const int ne = config.n_elements;
    const int nn = ne + 1;
    const double le = config.length_m / ne;
    const double e_mod = config.material.youngs_modulus_pa;
    const double rho = config.material.density_kgm3;

    Eigen::MatrixXd k_full = Eigen::MatrixXd::Zero(4 * nn, 4 * nn);
    Eigen::MatrixXd m_full = Eigen::MatrixXd::Zero(4 * nn, 4 * nn);

    Eigen::Matrix4d kp = detail::bending_stiffness_pattern(le);
    Eigen::Matrix4d mp = detail::bending_mass_pattern(le);

    for (int e = 0; e < ne; ++e) {
        auto p = detail::element_props(config, e * le, (e + 1) * le);
        if (!(p.area > 0.0 && p.ixx > 0.0 && p.iyy > 0.0))
            throw std::invalid_argument("non-physical section properties in element " + std::to_string(e));

        // x-plane dofs (u_x, theta_y) and y-plane dofs (u_y, theta_x) of the two element nodes
        std::array<int, 4> xd = {4 * e + 0, 4 * e + 1, 4 * (e + 1) + 0, 4 * (e + 1) + 1};
        std::array<int, 4> yd = {4 * e + 2, 4 * e + 3, 4 * (e + 1) + 2, 4 * (e + 1) + 3};

        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                k_full(xd[i], xd[j]) += e_mod * p.ixx * kp(i, j);
                k_full(yd[i], yd[j]) += e_mod * p.iyy * kp(i, j);
                k_full(xd[i], yd[j]) += e_mod * p.ixy * kp(i, j);
                k_full(yd[i], xd[j]) += e_mod * p.ixy * kp(i, j);
                m_full(xd[i], xd[j]) += rho * p.area * mp(i, j);
                m_full(yd[i], yd[j]) += rho * p.area * mp(i, j);
            }
        }
    }

    AssembledSystem sys;
    sys.modal_damping_ratio = config.material.modal_damping_ratio;
    sys.node_z.resize(nn);
    for (int n = 0; n < nn; ++n) sys.node_z[n] = n * le;

    sys.sensor_node = detail::nearest_node(config, config.sensor_position_m);
    sys.impact_node = detail::nearest_node(config, config.impact_position_m);

    if (config.sensor_point_mass_kg > 0.0) {
        m_full(4 * sys.sensor_node + 0, 4 * sys.sensor_node + 0) += config.sensor_point_mass_kg;
        m_full(4 * sys.sensor_node + 2, 4 * sys.sensor_node + 2) += config.sensor_point_mass_kg;
    }
    sys.m_full_trace = m_full.trace();

    // Clamp every node inside the fixation zone; the root node is always held.
    std::vector<bool> clamped(nn, false);
    clamped[0] = true;
    for (int n = 1; n < nn; ++n)
        if (sys.node_z[n] <= config.clamp_length_m + 1e-12) clamped[n] = true;
    sys.n_clamped_nodes = static_cast<int>(std::count(clamped.begin(), clamped.end(), true));
    if (sys.n_clamped_nodes >= nn)
        throw std::invalid_argument("clamp zone covers the whole blade");
    if (clamped[sys.sensor_node] || clamped[sys.impact_node])
        throw std::invalid_argument("sensor/impact node falls inside the clamp zone");

    sys.free_dof_of_full.assign(static_cast<std::size_t>(4 * nn), -1);
    int nf = 0;
    for (int n = 0; n < nn; ++n) {
        if (clamped[n]) continue;
        for (int c = 0; c < 4; ++c) sys.free_dof_of_full[static_cast<std::size_t>(4 * n + c)] = nf++;
    }

    sys.k_mat.resize(nf, nf);
    sys.m_mat.resize(nf, nf);
    for (int i = 0; i < 4 * nn; ++i) {
        int ri = sys.free_dof_of_full[static_cast<std::size_t>(i)];
        if (ri < 0) continue;
        for (int j = 0; j < 4 * nn; ++j) {
            int rj = sys.free_dof_of_full[static_cast<std::size_t>(j)];
            if (rj < 0) continue;
            sys.k_mat(ri, rj) = k_full(i, j);
            sys.m_mat(ri, rj) = m_full(i, j);
        }
    }
    return sys;
}

/// Returns a copy of the config with the damage folded into the section
/// table. Sections are split at the damage footprint so overlap accounting
/// is exact. Cracks: i_flap * (1-d)^3 (cube law for losing the cracked depth
/// fraction of a rectangular surrogate section), i_edge * (1-d), mass
/// untouched. Mass removal: area scaled so exactly mass_fraction of the
/// total blade mass disappears, stiffness untouched. A footprint reaching
/// into the clamp zone is applied to its free portion only and reported
/// through `warnings`.
inline BladeConfig apply_damage(const BladeConfig& config, const DamageSpec& damage,
                                std::vector<std::string>* warnings = nullptr) {
    config.validate();
    damage.validate(config.length_m);
    if (damage.kind == DamageKind::None) return config;
    if (damage.kind == DamageKind::TransverseCrack && damage.depth_ratio == 0.0) return config;
    if (damage.kind == DamageKind::MassRemoval && damage.mass_fraction == 0.0) return config;

    double lo = damage.position_m;
    double hi = damage.position_m + damage.length_m;
    if (lo < config.clamp_length_m) {
        if (warnings)
            warnings->push_back("damage '" + damage.label +
                                "' overlaps the clamp zone; applied to the free portion only");
        lo = config.clamp_length_m;
        if (hi <= lo)
            throw std::invalid_argument("damage '" + damage.label + "' lies entirely inside the clamp zone");
    }

    BladeConfig out = config;
    std::vector<SectionProps> split;
    split.reserve(out.sections.size() + 2);
    for (const auto& s : out.sections) {
        std::array<double, 4> cuts = {s.span_start_m, std::clamp(lo, s.span_start_m, s.span_end_m),
                                      std::clamp(hi, s.span_start_m, s.span_end_m), s.span_end_m};
        for (int i = 0; i < 3; ++i) {
            if (cuts[i + 1] - cuts[i] < 1e-12) continue;
            SectionProps piece = s;
            piece.span_start_m = cuts[i];
            piece.span_end_m = cuts[i + 1];
            split.push_back(piece);
        }
    }
    out.sections = std::move(split);

    auto overlapped = [&](const SectionProps& s) {
        return s.span_start_m >= lo - 1e-12 && s.span_end_m <= hi + 1e-12;
    };

    if (damage.kind == DamageKind::TransverseCrack) {
        double keep = 1.0 - damage.depth_ratio;
        for (auto& s : out.sections) {
            if (!overlapped(s)) continue;
            s.i_flap_m4 *= keep * keep * keep;
            s.i_edge_m4 *= keep;
        }
    } else {
        double band_mass = 0.0;
        for (const auto& s : out.sections)
            if (overlapped(s))
                band_mass += config.material.density_kgm3 * s.area_m2 * (s.span_end_m - s.span_start_m);
        double target = damage.mass_fraction * blade_mass(config);
        if (band_mass <= target)
            throw std::invalid_argument("damage '" + damage.label +
                                        "': footprint too small to remove the requested mass");
        double scale = 1.0 - target / band_mass;
        for (auto& s : out.sections)
            if (overlapped(s)) s.area_m2 *= scale;
    }
    return out;
}

/// Lowest n_modes eigenpairs of K*phi = w^2*M*phi via reduction to standard
/// form (Cholesky of M) and a dense symmetric solve. Shapes come back
/// mass-normalized with the largest-magnitude entry positive.
inline ModalResult solve_modes(const AssembledSystem& sys, int n_modes) {
    const int nf = sys.n_free_dofs();
    if (n_modes < 1 || n_modes > nf)
        throw std::invalid_argument("solve_modes: n_modes must be in [1, " + std::to_string(nf) + "]");

    Eigen::LLT<Eigen::MatrixXd> llt(sys.m_mat);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("solve_modes: mass matrix is not positive definite");

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(sys.k_mat, sys.m_mat,
                                                                     Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success) {
        double residual = (sys.k_mat - sys.k_mat.transpose()).cwiseAbs().maxCoeff();
        throw std::runtime_error("solve_modes: eigen solver failed to converge (symmetry residual " +
                                 std::to_string(residual) + ")");
    }

    ModalResult result;
    result.frequencies_hz.resize(n_modes);
    result.damping_ratios.assign(static_cast<std::size_t>(n_modes), sys.modal_damping_ratio);
    result.mode_shapes = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sys.free_dof_of_full.size()), n_modes);

    for (int m = 0; m < n_modes; ++m) {
        double lambda = solver.eigenvalues()(m);
        if (!(lambda > 0.0))
            throw std::runtime_error("solve_modes: non-positive eigenvalue " + std::to_string(lambda) +
                                     " (constrained stiffness should be positive definite)");
        result.frequencies_hz[static_cast<std::size_t>(m)] = std::sqrt(lambda) / (2.0 * kPi);

        Eigen::VectorXd phi = solver.eigenvectors().col(m);
        phi /= std::sqrt(phi.dot(sys.m_mat * phi));   // tighten the solver's B-normalization
        int imax = 0;
        for (int i = 1; i < nf; ++i)
            if (std::abs(phi(i)) > std::abs(phi(imax))) imax = i;
        if (phi(imax) < 0.0) phi = -phi;

        for (std::size_t full = 0; full < sys.free_dof_of_full.size(); ++full) {
            int r = sys.free_dof_of_full[full];
            if (r >= 0) result.mode_shapes(static_cast<Eigen::Index>(full), m) = phi(r);
        }
    }
    return result;
}

struct ModeShapeSample {
    std::vector<double> u_x;   // one value per requested position
    std::vector<double> u_y;
};

/// Nodal translations linearly interpolated at the requested positions.
/// Each mode's axes are normalized to unit peak over the blade, so the
/// dominant and the coupled axis are directly comparable across modes; an
/// axis with no content (untwisted pure-plane mode) stays exactly zero.
inline std::vector<ModeShapeSample> sample_mode_shape(const ModalResult& modal, const BladeConfig& config,
                                                      const std::vector<double>& positions) {
    for (double p : positions)
        if (!(p >= 0.0 && p <= config.length_m + 1e-12))
            throw std::invalid_argument("sample_mode_shape: position outside span");

    const int nn = config.n_elements + 1;
    const double le = config.length_m / config.n_elements;
    std::vector<ModeShapeSample> out(static_cast<std::size_t>(modal.n_modes()));

    for (int m = 0; m < modal.n_modes(); ++m) {
        double max_x = 0.0, max_y = 0.0;
        for (int n = 0; n < nn; ++n) {
            max_x = std::max(max_x, std::abs(modal.mode_shapes(4 * n + 0, m)));
            max_y = std::max(max_y, std::abs(modal.mode_shapes(4 * n + 2, m)));
        }
        double peak = std::max(max_x, max_y);
        // Axes carrying only numerical cross-talk are reported as exactly zero.
        double sx = (max_x > 1e-9 * peak) ? 1.0 / max_x : 0.0;
        double sy = (max_y > 1e-9 * peak) ? 1.0 / max_y : 0.0;

        auto& sample = out[static_cast<std::size_t>(m)];
        sample.u_x.reserve(positions.size());
        sample.u_y.reserve(positions.size());
        for (double p : positions) {
            int el = std::min(static_cast<int>(p / le), config.n_elements - 1);
            double t = p / le - el;
            double ux = (1.0 - t) * modal.mode_shapes(4 * el + 0, m) + t * modal.mode_shapes(4 * (el + 1) + 0, m);
            double uy = (1.0 - t) * modal.mode_shapes(4 * el + 2, m) + t * modal.mode_shapes(4 * (el + 1) + 2, m);
            sample.u_x.push_back(ux * sx);
            sample.u_y.push_back(uy * sy);
        }
    }
    return out;
}

/// Uniform rectangular-section cantilever; the workhorse of the analytic tests.
inline BladeConfig make_uniform_config(double length, int n_elements, double width, double height,
                                       const MaterialProps& material, double twist_rad = 0.0) {
    BladeConfig c;
    c.length_m = length;
    c.n_elements = n_elements;
    c.material = material;
    c.clamp_length_m = 0.0;
    c.sensor_position_m = length / 3.0;
    c.impact_position_m = length / 5.0;
    SectionProps s;
    s.span_start_m = 0.0;
    s.span_end_m = length;
    s.area_m2 = width * height;
    s.i_flap_m4 = width * height * height * height / 12.0;
    s.i_edge_m4 = height * width * width * width / 12.0;
    s.twist_rad = twist_rad;
    c.sections = {s};
    return c;
}

} // namespace bladefd::fem

#endif
