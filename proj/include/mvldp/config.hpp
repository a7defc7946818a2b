#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvldp/ldp.hpp"
#include "mvldp/mvsolve.hpp"
#include "mvldp/prm.hpp"
#include "mvldp/triple.hpp"

namespace mvldp {

struct DiscretizationConfig {
    std::size_t K_steps = 100;
    double picard_tol = 1e-8;
    double picard_window = 0.0;  ///< 0 selects the default window
    std::size_t max_outer = 50;
    std::size_t replicas = 256;
    bool unsafe_explicit = false;

    bool operator==(const DiscretizationConfig&) const = default;
};

struct NoiseConfig {
    double eps = 1.0;
    std::vector<double> eps_list{1.0};

    bool operator==(const NoiseConfig&) const = default;
};

struct ControlConfig {
    std::size_t cells = 1;
    std::vector<double> values;  ///< cells × marks, row-major; empty means g ≡ 1
    std::string file;            ///< CSV alternative to `values`, read at run time

    bool operator==(const ControlConfig&) const = default;
};

struct LdpConfig {
    RareEventSpec event;
    std::size_t budget = 2000;
    double g_max = 50.0;
    double tolerance = 1e-6;
    std::size_t starts = 5;

    bool operator==(const LdpConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "json"};

    bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
    ModelConfig model;
    DiscretizationConfig discretization;
    NoiseConfig noise;
    ControlConfig control;
    LdpConfig ldp;
    OutputConfig output;
    std::uint64_t base_seed = 1;
    std::size_t verify_samples = 10000;

    bool operator==(const RunConfig&) const = default;

    SolverOptions solver_options() const;
    RateOptions rate_options() const;
    bool wants(std::string_view format) const;
};

/// Sectioned key = value text: `[section]` headers, `#` comments.  Unknown
/// sections or keys, malformed values and violated constraints throw
/// ValidationError naming the line and the field.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Canonical text with every field, so parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);

/// Effective configuration with defaults resolved against the triple.
nlohmann::json config_to_json(const RunConfig& config, const DiscretizedTriple& triple);

/// Control from [control]; `values` or `file`, else g ≡ 1.
Control build_control(const RunConfig& config, const std::string& base_dir = ".");

}  // namespace mvldp
