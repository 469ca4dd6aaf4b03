#pragma once

#include "panelms/simulate.hpp"

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace panelms {

enum class ExperimentKind { Size, Power, Fwer, Cluster };

ExperimentKind experiment_kind_from_name(const std::string& name);
std::string experiment_kind_name(ExperimentKind kind);

/// How the experiment grid is built from T.
struct GridSpec {
    bool application = true;
    std::size_t u_step = 5;
    std::vector<double> h_values;
    std::optional<double> h_min;

    Grid build(std::size_t T) const;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Size;
    DgpSpec dgp;
    ExperimentOptions options;
    GridSpec grid;
    std::optional<PowerDeviation> deviation;
    std::vector<double> scales;
};

/**
 * Parses a key = value experiment file ('#' starts a comment). Curves are
 * named with `curve.<name> = <coord 1> ; <coord 2> ; ...`, each coordinate a
 * '+'-separated sum of const(c), linear(a,b), sine(amp,freq,phase) and
 * bump(center,width,height[,ramp]). `units` lists one curve name per unit;
 * units sharing a name form one true group.
 *
 * Throws ParseError naming the line for any malformed or unknown entry.
 */
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Parses a single curve coordinate such as "const(1) + bump(0.5,0.1,2)".
Curve parse_curve(const std::string& text);

}  // namespace panelms
