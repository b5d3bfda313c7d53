#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "gaussian.hpp"
#include "master.hpp"
#include "network.hpp"
#include "propagator.hpp"
#include "reduced.hpp"
#include "spectral.hpp"
#include "types.hpp"

namespace oqnet {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class ReservoirStateKind { ZeroTemperature, Thermal, Squeezed };

/// Initial reservoir state. Thermal accepts either a flat mean occupation
/// `nbar` or a `temperature` (Bose-Einstein per mode); squeezed means
/// independent squeezed vacua with common (r, theta).
struct ReservoirStateSpec {
    ReservoirStateKind kind = ReservoirStateKind::ZeroTemperature;
    std::optional<double> nbar;
    std::optional<double> temperature;
    double r = 0.0;
    double theta = 0.0;
};

struct TimeGridSpec {
    double t_max = 10.0;
    int n_points = 201;
};

/// Network source: exactly one of `explicit_spec` or `preset` must be set.
/// The preset path discretizes the spectral density around a system mode of
/// renormalized frequency `system_frequency` and mass `system_mass`.
struct NetworkInput {
    std::optional<NetworkSpec> explicit_spec;
    std::optional<SpectralPreset> preset;
    double system_frequency = 1.0;
    double system_mass = 1.0;
};

/// Full, archivable description of one simulation. All randomness used by
/// consumers (e.g. randomized test-spec generation) flows from `seed`.
struct SimulationConfig {
    NetworkInput network;
    ReservoirStateSpec reservoir_state;
    TimeGridSpec time;
    CouplingMode mode = CouplingMode::Full;
    double integrator_tolerance = 1e-10;
    double degeneracy_tolerance = 1e-12;
    std::vector<std::string> outputs = {"coefficients"};
    std::uint64_t seed = 0;
};

namespace detail {

inline double require_number(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw ConfigError(std::string("missing or non-numeric field: ") + key);
    return j[key].get<double>();
}

inline Vector vector_from_json(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array())
        throw ConfigError(std::string("missing or non-array field: ") + key);
    Vector v(j[key].size());
    for (std::size_t i = 0; i < j[key].size(); ++i) v(i) = j[key][i].get<double>();
    return v;
}

inline json vector_to_json(const Vector& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

}  // namespace detail

inline json network_spec_to_json(const NetworkSpec& spec) {
    json rows = json::array();
    for (int i = 0; i < spec.couplings.rows(); ++i)
        rows.push_back(detail::vector_to_json(spec.couplings.row(i)));
    return json{{"n_system", spec.n_system},
                {"n_reservoir", spec.n_reservoir},
                {"masses", detail::vector_to_json(spec.masses)},
                {"bare_frequencies", detail::vector_to_json(spec.bare_frequencies)},
                {"couplings", rows}};
}

inline NetworkSpec network_spec_from_json(const json& j) {
    NetworkSpec spec;
    spec.n_system = static_cast<int>(detail::require_number(j, "n_system"));
    spec.n_reservoir = static_cast<int>(detail::require_number(j, "n_reservoir"));
    spec.masses = detail::vector_from_json(j, "masses");
    spec.bare_frequencies = detail::vector_from_json(j, "bare_frequencies");
    if (!j.contains("couplings") || !j["couplings"].is_array())
        throw ConfigError("missing or non-array field: couplings");
    const auto& rows = j["couplings"];
    spec.couplings.resize(rows.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) throw ConfigError("couplings must be square");
        for (std::size_t k = 0; k < rows.size(); ++k)
            spec.couplings(i, k) = rows[i][k].get<double>();
    }
    return spec;
}

inline json spectral_preset_to_json(const SpectralPreset& p) {
    static const std::map<SpectralFamily, std::string> names = {
        {SpectralFamily::Ohmic, "ohmic"},
        {SpectralFamily::Lorentzian, "lorentzian"},
        {SpectralFamily::Flat, "flat"},
        {SpectralFamily::SingleMode, "single_mode"}};
    return json{{"family", names.at(p.family)},
                {"coupling_scale", p.coupling_scale},
                {"cutoff", p.cutoff},
                {"center", p.center},
                {"width", p.width},
                {"mode_frequency", p.mode_frequency},
                {"n_modes", p.n_modes},
                {"scheme", p.scheme == BinScheme::Log ? "log" : "linear"},
                {"omega_min", p.omega_min},
                {"omega_max", p.omega_max}};
}

inline SpectralPreset spectral_preset_from_json(const json& j) {
    SpectralPreset p;
    const std::string family = j.value("family", "ohmic");
    if (family == "ohmic") p.family = SpectralFamily::Ohmic;
    else if (family == "lorentzian") p.family = SpectralFamily::Lorentzian;
    else if (family == "flat") p.family = SpectralFamily::Flat;
    else if (family == "single_mode") p.family = SpectralFamily::SingleMode;
    else throw ConfigError("unknown spectral family: " + family);
    p.coupling_scale = j.value("coupling_scale", p.coupling_scale);
    p.cutoff = j.value("cutoff", p.cutoff);
    p.center = j.value("center", p.center);
    p.width = j.value("width", p.width);
    p.mode_frequency = j.value("mode_frequency", p.mode_frequency);
    p.n_modes = j.value("n_modes", p.n_modes);
    const std::string scheme = j.value("scheme", "linear");
    if (scheme == "linear") p.scheme = BinScheme::Linear;
    else if (scheme == "log") p.scheme = BinScheme::Log;
    else throw ConfigError("unknown discretization scheme: " + scheme);
    p.omega_min = j.value("omega_min", p.omega_min);
    p.omega_max = j.value("omega_max", p.omega_max);
    return p;
}

inline json config_to_json(const SimulationConfig& c) {
    json network;
    if (c.network.explicit_spec)
        network["explicit"] = network_spec_to_json(*c.network.explicit_spec);
    if (c.network.preset) network["preset"] = spectral_preset_to_json(*c.network.preset);
    network["system_frequency"] = c.network.system_frequency;
    network["system_mass"] = c.network.system_mass;

    json state;
    switch (c.reservoir_state.kind) {
        case ReservoirStateKind::ZeroTemperature:
            state["kind"] = "zero_temperature";
            break;
        case ReservoirStateKind::Thermal:
            state["kind"] = "thermal";
            if (c.reservoir_state.nbar) state["nbar"] = *c.reservoir_state.nbar;
            if (c.reservoir_state.temperature)
                state["temperature"] = *c.reservoir_state.temperature;
            break;
        case ReservoirStateKind::Squeezed:
            state["kind"] = "squeezed";
            state["r"] = c.reservoir_state.r;
            state["theta"] = c.reservoir_state.theta;
            break;
    }

    return json{{"network", network},
                {"reservoir_state", state},
                {"time", json{{"t_max", c.time.t_max}, {"n_points", c.time.n_points}}},
                {"mode", c.mode == CouplingMode::Rwa ? "rwa" : "full"},
                {"tolerances", json{{"integrator", c.integrator_tolerance},
                                    {"degeneracy", c.degeneracy_tolerance}}},
                {"outputs", c.outputs},
                {"seed", c.seed}};
}

inline SimulationConfig config_from_json(const json& j) {
    SimulationConfig c;
    if (!j.contains("network") || !j["network"].is_object())
        throw ConfigError("config needs a 'network' object");
    const json& network = j["network"];
    if (network.contains("explicit"))
        c.network.explicit_spec = network_spec_from_json(network["explicit"]);
    if (network.contains("preset"))
        c.network.preset = spectral_preset_from_json(network["preset"]);
    if (c.network.explicit_spec && c.network.preset)
        throw ConfigError("network must be either explicit or a preset, not both");
    if (!c.network.explicit_spec && !c.network.preset)
        throw ConfigError("network needs an 'explicit' spec or a 'preset'");
    c.network.system_frequency = network.value("system_frequency", 1.0);
    c.network.system_mass = network.value("system_mass", 1.0);

    const json state = j.value("reservoir_state", json{{"kind", "zero_temperature"}});
    const std::string kind = state.value("kind", "zero_temperature");
    if (kind == "zero_temperature") {
        c.reservoir_state.kind = ReservoirStateKind::ZeroTemperature;
    } else if (kind == "thermal") {
        c.reservoir_state.kind = ReservoirStateKind::Thermal;
        if (state.contains("nbar")) c.reservoir_state.nbar = state["nbar"].get<double>();
        if (state.contains("temperature"))
            c.reservoir_state.temperature = state["temperature"].get<double>();
        if (!c.reservoir_state.nbar && !c.reservoir_state.temperature)
            throw ConfigError("thermal reservoir_state needs 'nbar' or 'temperature'");
        if (c.reservoir_state.nbar && c.reservoir_state.temperature)
            throw ConfigError("thermal reservoir_state takes 'nbar' or 'temperature', not both");
    } else if (kind == "squeezed") {
        c.reservoir_state.kind = ReservoirStateKind::Squeezed;
        c.reservoir_state.r = state.value("r", 0.0);
        c.reservoir_state.theta = state.value("theta", 0.0);
    } else {
        throw ConfigError("unknown reservoir_state kind: " + kind);
    }

    const json time = j.value("time", json::object());
    c.time.t_max = time.value("t_max", c.time.t_max);
    c.time.n_points = time.value("n_points", c.time.n_points);
    if (c.time.t_max <= 0.0) throw ConfigError("time.t_max must be positive");
    if (c.time.n_points < 2) throw ConfigError("time.n_points must be at least 2");

    const std::string mode = j.value("mode", "full");
    if (mode == "full") c.mode = CouplingMode::Full;
    else if (mode == "rwa") c.mode = CouplingMode::Rwa;
    else throw ConfigError("unknown mode: " + mode);

    const json tol = j.value("tolerances", json::object());
    c.integrator_tolerance = tol.value("integrator", c.integrator_tolerance);
    c.degeneracy_tolerance = tol.value("degeneracy", c.degeneracy_tolerance);

    c.outputs = j.value("outputs", c.outputs);
    for (const std::string& o : c.outputs)
        if (o != "propagator" && o != "coefficients" && o != "state" && o != "distortion")
            throw ConfigError("unknown output product: " + o);
    c.seed = j.value("seed", c.seed);
    return c;
}

// ---------------------------------------------------------------------------
// Bundled presets
// ---------------------------------------------------------------------------

/// Named ready-to-run configurations shipped with the CLI.
inline const std::map<std::string, std::string>& bundled_configs() {
    static const std::map<std::string, std::string> presets = {
        {"nonmarkov_single_mode", R"({
            "network": {
                "preset": {"family": "single_mode", "coupling_scale": 0.3,
                           "mode_frequency": 1.0},
                "system_frequency": 1.0
            },
            "reservoir_state": {"kind": "zero_temperature"},
            "time": {"t_max": 20.0, "n_points": 801},
            "mode": "full",
            "outputs": ["coefficients"]
        })"},
        {"ohmic_weak", R"({
            "network": {
                "preset": {"family": "ohmic", "coupling_scale": 1e-4,
                           "cutoff": 1.0, "n_modes": 200,
                           "omega_min": 0.001, "omega_max": 10.0},
                "system_frequency": 1.0
            },
            "reservoir_state": {"kind": "zero_temperature"},
            "time": {"t_max": 10.0, "n_points": 401},
            "mode": "rwa",
            "outputs": ["coefficients"]
        })"},
        {"glauber_rwa", R"({
            "network": {
                "preset": {"family": "single_mode", "coupling_scale": 0.2,
                           "mode_frequency": 1.3},
                "system_frequency": 1.0
            },
            "reservoir_state": {"kind": "zero_temperature"},
            "time": {"t_max": 50.0, "n_points": 501},
            "mode": "rwa",
            "outputs": ["coefficients", "distortion"]
        })"}};
    return presets;
}

/// Loads a config from a file path, or from the bundled set when `source`
/// names a bundled preset instead of an existing file.
inline SimulationConfig load_config(const std::string& source) {
    std::string text;
    if (std::filesystem::exists(source)) {
        std::ifstream in(source);
        std::stringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    } else if (auto it = bundled_configs().find(source); it != bundled_configs().end()) {
        text = it->second;
    } else {
        throw ConfigError("config not found (no such file or bundled preset): " + source);
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

/// Everything one run produces, kept in memory so callers can inspect the
/// pipeline stages directly. Optional stages are empty when not requested.
struct RunResult {
    SimulationConfig config;
    RenormalizedNetwork net;
    UVTrajectory uv;
    ReservoirMoments moments = ReservoirMoments::zero_temperature(0);
    NoiseKernels kernels;
    MasterCoefficients coeffs;
    LindbladForm lindblad;
    MarkovianityReport markov;
    VacuumDistortion distortion;
    bool has_coefficients = false;
    bool has_distortion = false;
};

namespace detail {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("stage ") + name + ": " + e.what());
    } catch (const Error& e) {
        throw Error(std::string("stage ") + name + ": " + e.what());
    }
}

}  // namespace detail

inline RunResult run_simulation(const SimulationConfig& config) {
    RunResult result;
    result.config = config;

    result.net = detail::stage("network-model", [&] {
        if (config.network.explicit_spec) {
            const ValidationReport report = validate(*config.network.explicit_spec);
            if (!report.ok())
                throw ConfigError("explicit network failed validation: " +
                                  report.issues.front().second);
            return renormalize(*config.network.explicit_spec);
        }
        if (config.time.t_max > recurrence_horizon(*config.network.preset))
            throw ConfigError("t_max exceeds the discretization validity horizon; "
                              "increase n_modes or shorten the run");
        const DiscretizedReservoir res = discretize_spectral_density(
            *config.network.preset, config.network.system_frequency,
            config.network.system_mass);
        return renormalize(res.network);
    });

    Vector grid = Vector::LinSpaced(config.time.n_points, 0.0, config.time.t_max);
    grid(0) = 0.0;

    result.uv = detail::stage("propagator", [&] {
        return evolve_uv(result.net, grid, RowSpan::SystemOnly, 1, config.mode,
                         config.integrator_tolerance);
    });

    const int n_res = result.net.total_modes() - 1;
    result.moments = detail::stage("reduced-dynamics", [&] {
        switch (config.reservoir_state.kind) {
            case ReservoirStateKind::Thermal:
                if (config.reservoir_state.nbar)
                    return ReservoirMoments::thermal(
                        Vector::Constant(n_res, *config.reservoir_state.nbar));
                return ReservoirMoments::thermal(
                    *config.reservoir_state.temperature,
                    result.net.frequencies.tail(n_res));
            case ReservoirStateKind::Squeezed:
                return ReservoirMoments::squeezed(
                    Vector::Constant(n_res, config.reservoir_state.r),
                    Vector::Constant(n_res, config.reservoir_state.theta));
            case ReservoirStateKind::ZeroTemperature:
            default:
                return ReservoirMoments::zero_temperature(n_res);
        }
    });
    result.kernels = detail::stage("reduced-dynamics", [&] {
        return make_noise_kernels(result.uv, result.moments);
    });

    auto wants = [&](const char* product) {
        for (const auto& o : config.outputs)
            if (o == product) return true;
        return false;
    };

    if (wants("coefficients")) {
        detail::stage("master-equation", [&] {
            result.coeffs = extract_coefficients(result.net, result.uv, result.moments,
                                                 config.degeneracy_tolerance);
            result.lindblad = lindblad_diagonalize(result.coeffs);
            result.markov =
                markovianity_report(result.coeffs, config.mode == CouplingMode::Rwa);
            result.has_coefficients = true;
            return 0;
        });
    }
    if (wants("distortion") || wants("state")) {
        detail::stage("gaussian-states", [&] {
            result.distortion = vacuum_distortion(result.uv, result.kernels);
            result.has_distortion = true;
            return 0;
        });
    }
    return result;
}

// ---------------------------------------------------------------------------
// Deterministic export
// ---------------------------------------------------------------------------

namespace detail {

/// Shortest exact decimal form; identical across runs by construction.
inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// FNV-1a over the canonical config dump.
inline std::string config_hash(const json& j) {
    const std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace detail

/// Columns: t, then re_U_k_j, im_U_k_j, re_V_k_j, im_V_k_j for each kept row
/// k and source mode j (1-based, row-major over (k, j)).
inline void write_propagator_csv(const UVTrajectory& uv, std::ostream& out) {
    out << "t";
    for (int k = 0; k < uv.rows_kept(); ++k)
        for (int j = 0; j < uv.total_modes(); ++j) {
            const std::string suffix =
                "_" + std::to_string(k + 1) + "_" + std::to_string(j + 1);
            out << ",re_U" << suffix << ",im_U" << suffix << ",re_V" << suffix
                << ",im_V" << suffix;
        }
    out << "\n";
    for (int i = 0; i < uv.n_points(); ++i) {
        out << detail::fmt(uv.time_grid(i));
        for (int k = 0; k < uv.rows_kept(); ++k)
            for (int j = 0; j < uv.total_modes(); ++j) {
                const Complex u = uv.u_blocks[i](k, j), v = uv.v_blocks[i](k, j);
                out << "," << detail::fmt(u.real()) << "," << detail::fmt(u.imag())
                    << "," << detail::fmt(v.real()) << "," << detail::fmt(v.imag());
            }
        out << "\n";
    }
}

/// Columns: t, omega, gamma1, gamma2, re_xi, im_xi, re_eta, im_eta, lambda1,
/// lambda2, theta, markov_ineq1, markov_ineq2. Rows where the map is
/// degenerate are masked: every numeric column after t is nan.
inline void write_coefficients_csv(const MasterCoefficients& coeffs,
                                   const LindbladForm& lind,
                                   const MarkovianityReport& markov, std::ostream& out) {
    out << "t,omega,gamma1,gamma2,re_xi,im_xi,re_eta,im_eta,"
           "lambda1,lambda2,theta,markov_ineq1,markov_ineq2\n";
    for (int i = 0; i < coeffs.n_points(); ++i) {
        out << detail::fmt(coeffs.time_grid(i));
        if (!coeffs.valid[i]) {
            for (int c = 0; c < 12; ++c) out << ",nan";
            out << "\n";
            continue;
        }
        out << "," << detail::fmt(coeffs.omega(i)) << "," << detail::fmt(coeffs.gamma1(i))
            << "," << detail::fmt(coeffs.gamma2(i)) << ","
            << detail::fmt(coeffs.xi(i).real()) << "," << detail::fmt(coeffs.xi(i).imag())
            << "," << detail::fmt(coeffs.eta(i).real()) << ","
            << detail::fmt(coeffs.eta(i).imag()) << "," << detail::fmt(lind.lambda1(i))
            << "," << detail::fmt(lind.lambda2(i)) << "," << detail::fmt(lind.theta(i))
            << "," << (markov.ineq1[i] ? 1 : 0) << "," << (markov.ineq2[i] ? 1 : 0)
            << "\n";
    }
}

/// Columns: t, re_mean_k, im_mean_k per system mode, then cov_i_j row-major
/// over the 2m x 2m covariance in (x..., p...) ordering.
inline void write_state_csv(const VacuumDistortion& dist, std::ostream& out) {
    const int dim = dist.covariances.empty() ? 0 : static_cast<int>(dist.covariances[0].rows());
    const int m = dim / 2;
    out << "t";
    for (int k = 0; k < m; ++k)
        out << ",re_mean_" << k + 1 << ",im_mean_" << k + 1;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) out << ",cov_" << i + 1 << "_" << j + 1;
    out << "\n";
    for (std::size_t n = 0; n < dist.covariances.size(); ++n) {
        out << detail::fmt(dist.time_grid(static_cast<int>(n)));
        for (int k = 0; k < m; ++k) out << ",0,0";
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                out << "," << detail::fmt(dist.covariances[n](i, j));
        out << "\n";
    }
}

inline json distortion_to_json(const VacuumDistortion& dist) {
    json times = json::array(), covs = json::array(), regular = json::array();
    for (std::size_t n = 0; n < dist.covariances.size(); ++n) {
        times.push_back(dist.time_grid(static_cast<int>(n)));
        json rows = json::array();
        for (int i = 0; i < dist.covariances[n].rows(); ++i)
            rows.push_back(detail::vector_to_json(dist.covariances[n].row(i)));
        covs.push_back(rows);
        regular.push_back(static_cast<bool>(dist.regular_p[n]));
    }
    return json{{"time", times}, {"covariances", covs}, {"regular_p", regular}};
}

/// Writes every requested product plus manifest.json into `out_dir`.
/// Identical configs produce byte-identical files.
inline std::vector<std::string> write_artifacts(const RunResult& result,
                                                const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> products;
    auto open = [&](const std::string& name) {
        products.push_back(name);
        return std::ofstream(fs::path(out_dir) / name);
    };

    auto wants = [&](const char* product) {
        for (const auto& o : result.config.outputs)
            if (o == product) return true;
        return false;
    };

    if (wants("propagator")) {
        auto out = open("propagator.csv");
        write_propagator_csv(result.uv, out);
    }
    if (result.has_coefficients) {
        auto out = open("coefficients.csv");
        write_coefficients_csv(result.coeffs, result.lindblad, result.markov, out);
    }
    if (result.has_distortion && wants("state")) {
        auto out = open("state.csv");
        write_state_csv(result.distortion, out);
    }
    if (result.has_distortion && wants("distortion")) {
        auto out = open("distortion.json");
        out << distortion_to_json(result.distortion).dump(2) << "\n";
    }

    const json config_json = config_to_json(result.config);
    json manifest{{"config", config_json},
                  {"config_hash", detail::config_hash(config_json)},
                  {"tolerances", json{{"integrator", result.config.integrator_tolerance},
                                      {"degeneracy", result.config.degeneracy_tolerance}}},
                  {"version", "0.1.0"},
                  {"products", products}};
    if (result.has_coefficients) {
        json masked = json::array();
        for (int i = 0; i < result.coeffs.n_points(); ++i)
            if (!result.coeffs.valid[i]) masked.push_back(i);
        manifest["masked_rows"] = masked;
        switch (result.markov.classification) {
            case Markovianity::Markovian: manifest["classification"] = "markovian"; break;
            case Markovianity::TimeDependentMarkovian:
                manifest["classification"] = "time_dependent_markovian";
                break;
            case Markovianity::NonMarkovian:
                manifest["classification"] = "non_markovian";
                break;
        }
        if (result.markov.first_violation)
            manifest["first_violation"] = *result.markov.first_violation;
    }
    {
        std::ofstream out(fs::path(out_dir) / "manifest.json");
        out << manifest.dump(2) << "\n";
        products.push_back("manifest.json");
    }
    return products;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// One sweep axis: a JSON pointer into the serialized config plus the values
/// to substitute there.
struct SweepAxis {
    std::string path;
    std::vector<json> values;
};

/// Per-grid-point summary. `error` is empty on success; on failure the other
/// summary fields are meaningless and the row records what went wrong.
struct SweepRow {
    int index = 0;
    std::vector<json> point;
    std::optional<double> first_violation;
    double max_abs_eta = 0.0;
    double mean_gamma1_tail = 0.0;
    double mean_gamma2_tail = 0.0;
    Markovianity classification = Markovianity::Markovian;
    std::string error;
};

/// Summary of one finished run: violation onset, peak |eta| and the mean
/// rates over the trailing 20% of the grid (the steady-state window).
inline SweepRow summarize_run(const RunResult& result) {
    SweepRow row;
    if (!result.has_coefficients)
        throw ConfigError("sweep requires the 'coefficients' output");
    row.first_violation = result.markov.first_violation;
    row.classification = result.markov.classification;
    const int n = result.coeffs.n_points();
    const int tail_start = n - std::max(1, n / 5);
    int tail_count = 0;
    for (int i = 0; i < n; ++i) {
        if (!result.coeffs.valid[i]) continue;
        row.max_abs_eta = std::max(row.max_abs_eta, std::abs(result.coeffs.eta(i)));
        if (i >= tail_start) {
            row.mean_gamma1_tail += result.coeffs.gamma1(i);
            row.mean_gamma2_tail += result.coeffs.gamma2(i);
            ++tail_count;
        }
    }
    if (tail_count > 0) {
        row.mean_gamma1_tail /= tail_count;
        row.mean_gamma2_tail /= tail_count;
    }
    return row;
}

/// Runs the cartesian grid of `axes` over `base`. Points execute on up to
/// `workers` threads; each point is internally deterministic and rows come
/// back sorted by grid index regardless of completion order. Per-point
/// failures are recorded in-row and the sweep continues.
inline std::vector<SweepRow> run_sweep(const SimulationConfig& base,
                                       const std::vector<SweepAxis>& axes,
                                       int workers = 1, int max_points = 4096) {
    std::size_t total = 1;
    for (const auto& axis : axes) {
        if (axis.values.empty()) throw ConfigError("sweep axis has no values: " + axis.path);
        total *= axis.values.size();
    }
    if (total > static_cast<std::size_t>(max_points))
        throw ConfigError("sweep grid exceeds the configured point cap");

    const json base_json = config_to_json(base);
    std::vector<SweepRow> rows(total);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= total) return;
            SweepRow& row = rows[idx];
            row.index = static_cast<int>(idx);
            std::size_t rem = idx;
            json point = base_json;
            try {
                for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
                    const std::size_t k = rem % it->values.size();
                    rem /= it->values.size();
                    point[json::json_pointer(it->path)] = it->values[k];
                    row.point.push_back(it->values[k]);
                }
                std::reverse(row.point.begin(), row.point.end());
                SimulationConfig config = config_from_json(point);
                if (std::find(config.outputs.begin(), config.outputs.end(),
                              "coefficients") == config.outputs.end())
                    config.outputs.push_back("coefficients");
                const SweepRow summary = summarize_run(run_simulation(config));
                row.first_violation = summary.first_violation;
                row.max_abs_eta = summary.max_abs_eta;
                row.mean_gamma1_tail = summary.mean_gamma1_tail;
                row.mean_gamma2_tail = summary.mean_gamma2_tail;
                row.classification = summary.classification;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };

    workers = std::max(1, workers);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return rows;
}

/// Columns: index, one column per axis (its JSON-pointer path), status
/// (ok or the error message), classification, first_violation (nan when the
/// run never violates), max_abs_eta, mean_gamma1, mean_gamma2.
inline void write_sweep_csv(const std::vector<SweepAxis>& axes,
                            const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "index";
    for (const auto& axis : axes) out << "," << axis.path;
    out << ",status,classification,first_violation,max_abs_eta,mean_gamma1,mean_gamma2\n";
    for (const auto& row : rows) {
        out << row.index;
        for (std::size_t a = 0; a < axes.size(); ++a)
            out << "," << (a < row.point.size() ? row.point[a].dump() : std::string());
        if (!row.error.empty()) {
            std::string msg = row.error;
            for (char& ch : msg)
                if (ch == ',' || ch == '\n') ch = ';';
            out << ",error: " << msg << ",,nan,nan,nan,nan\n";
            continue;
        }
        const char* cls = row.classification == Markovianity::NonMarkovian
                              ? "non_markovian"
                              : (row.classification == Markovianity::Markovian
                                     ? "markovian"
                                     : "time_dependent_markovian");
        out << ",ok," << cls << ","
            << (row.first_violation ? detail::fmt(*row.first_violation) : "nan") << ","
            << detail::fmt(row.max_abs_eta) << "," << detail::fmt(row.mean_gamma1_tail)
            << "," << detail::fmt(row.mean_gamma2_tail) << "\n";
    }
}

}  // namespace oqnet
