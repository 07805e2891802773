#pragma once

#include "pwsde/hypersurface.hpp"
#include "pwsde/linalg.hpp"
#include "pwsde/sde.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pwsde {

enum class Command { simulate, convergence, occupation, excursion, dump_transform };
enum class SchemeChoice { em, gm, both };

std::string_view to_string(Command c);
std::string_view to_string(SchemeChoice s);

/// One experiment. Serialised as flat `key = value` lines.
struct ExperimentConfig {
    Command command = Command::convergence;
    std::string problem = "circle2d";
    SchemeChoice scheme = SchemeChoice::both;
    std::vector<double> deltas;
    std::optional<double> delta;
    std::size_t paths = 1000;
    std::uint64_t seed = 0;
    int ref_levels = 16;
    std::vector<double> eps;
    std::string out;
    std::size_t grid = 1001;
    std::optional<std::vector<double>> initial;
    std::optional<double> horizon;
    std::optional<std::string> surface;

    bool operator==(const ExperimentConfig&) const = default;
};

/// `2^-a..2^-b` (every dyadic step in between), `2^-k`, or decimals,
/// comma separated.
std::vector<double> parse_deltas(std::string_view text);

/// `pointset1d(x1,...)`, `hyperplane(a1,...,ad;b)`, `sphere(c1,...,cd;r)`;
/// the `;` may be a comma, in which case the last number is the scalar.
Hypersurface parse_surface(std::string_view text);

/// Sets one key; `where` prefixes error messages (e.g. "line 3").
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value,
                   std::string_view where = "");

/// Flat key=value text, `#` comments, blank lines ignored. ConfigError with
/// the line number on malformed lines or unknown keys.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});

std::string serialize(const ExperimentConfig& config);

/// Registry problem with the config's initial / horizon / surface overrides applied.
SdeProblem resolve_problem(const ExperimentConfig& config);

}  // namespace pwsde
