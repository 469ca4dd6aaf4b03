#include "panelms/sim_config.hpp"

#include "panelms/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace panelms {

ExperimentKind experiment_kind_from_name(const std::string& name) {
    if (name == "size") {
        return ExperimentKind::Size;
    }
    if (name == "power") {
        return ExperimentKind::Power;
    }
    if (name == "fwer") {
        return ExperimentKind::Fwer;
    }
    if (name == "cluster") {
        return ExperimentKind::Cluster;
    }
    throw ParseError("unknown experiment '" + name + "' (expected size, power, fwer or cluster)");
}

std::string experiment_kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Size:
            return "size";
        case ExperimentKind::Power:
            return "power";
        case ExperimentKind::Fwer:
            return "fwer";
        case ExperimentKind::Cluster:
            return "cluster";
    }
    return "size";
}

Grid GridSpec::build(std::size_t T) const {
    if (application) {
        return build_grid_application(T);
    }
    return build_grid_custom(T, u_step, h_values, h_min);
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        out.push_back(trim(item));
    }
    if (!s.empty() && s.back() == sep) {
        out.emplace_back();
    }
    return out;
}

double parse_number(const std::string& text, const std::string& what) {
    double v = 0.0;
    const std::string t = trim(text);
    const char* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (t.empty() || ec != std::errc{} || ptr != end) {
        throw ParseError(what + ": expected a number, got '" + t + "'");
    }
    return v;
}

std::size_t parse_count(const std::string& text, const std::string& what) {
    std::size_t v = 0;
    const std::string t = trim(text);
    const char* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (t.empty() || ec != std::errc{} || ptr != end) {
        throw ParseError(what + ": expected a nonnegative integer, got '" + t + "'");
    }
    return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
    if (text == "true" || text == "1" || text == "yes") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no") {
        return false;
    }
    throw ParseError(what + ": expected true or false, got '" + text + "'");
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& item : split(text, ',')) {
        out.push_back(parse_number(item, what));
    }
    return out;
}

CurveTerm parse_term(const std::string& text) {
    const auto open = text.find('(');
    if (open == std::string::npos || text.back() != ')') {
        throw ParseError("curve term '" + text + "' must look like name(args)");
    }
    const std::string name = trim(text.substr(0, open));
    const auto args = parse_number_list(text.substr(open + 1, text.size() - open - 2), "curve term '" + text + "'");
    const auto need = [&](std::size_t lo, std::size_t hi) {
        if (args.size() < lo || args.size() > hi) {
            throw ParseError("curve term '" + text + "' has " + std::to_string(args.size()) + " arguments");
        }
    };
    if (name == "const") {
        need(1, 1);
        return CurveTerm::constant(args[0]);
    }
    if (name == "linear") {
        need(2, 2);
        return CurveTerm::linear(args[0], args[1]);
    }
    if (name == "sine") {
        need(2, 3);
        return CurveTerm::sine(args[0], args[1], args.size() > 2 ? args[2] : 0.0);
    }
    if (name == "bump") {
        need(3, 4);
        if (args.size() == 4 && !(args[3] > 0.0)) {
            throw ParseError("curve term '" + text + "': bump ramp must be positive");
        }
        return CurveTerm::bump(args[0], args[1], args[2], args.size() > 3 ? args[3] : 0.05);
    }
    throw ParseError("unknown curve term '" + name + "' (expected const, linear, sine or bump)");
}

}  // namespace

Curve parse_curve(const std::string& text) {
    Curve curve;
    // '+' inside parentheses belongs to a number's exponent or sign.
    std::string current;
    int depth = 0;
    const auto flush = [&] {
        const std::string t = trim(current);
        if (t.empty()) {
            throw ParseError("empty term in curve '" + text + "'");
        }
        curve.terms.push_back(parse_term(t));
        current.clear();
    };
    for (const char c : text) {
        if (c == '(') {
            ++depth;
        } else if (c == ')') {
            --depth;
        }
        if (c == '+' && depth == 0) {
            flush();
        } else {
            current.push_back(c);
        }
    }
    if (depth != 0) {
        throw ParseError("unbalanced parentheses in curve '" + text + "'");
    }
    flush();
    return curve;
}

ExperimentConfig parse_experiment_config(std::istream& in) {
    std::map<std::string, std::pair<std::string, std::size_t>> entries;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(number) + ": expected key = value");
        }
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) {
            throw ParseError("config line " + std::to_string(number) + ": empty key");
        }
        if (!entries.emplace(key, std::make_pair(trim(t.substr(eq + 1)), number)).second) {
            throw ParseError("config line " + std::to_string(number) + ": duplicate key '" + key + "'");
        }
    }

    ExperimentConfig cfg;
    std::set<std::string> used;
    const auto where = [&](const std::string& key) {
        const auto it = entries.find(key);
        return it == entries.end() ? "config (" + key + ")"
                                   : "config line " + std::to_string(it->second.second) + " (" + key + ")";
    };
    const auto get = [&](const std::string& key) -> std::optional<std::string> {
        auto it = entries.find(key);
        if (it == entries.end()) {
            return std::nullopt;
        }
        used.insert(key);
        return it->second.first;
    };
    const auto require = [&](const std::string& key) {
        auto v = get(key);
        if (!v) {
            throw ParseError("config: missing required key '" + key + "'");
        }
        return *v;
    };

    try {
        cfg.kind = experiment_kind_from_name(require("experiment"));
        cfg.dgp.N = parse_count(require("N"), where("N"));
        cfg.dgp.T = parse_count(require("T"), where("T"));
        cfg.dgp.D = parse_count(require("D"), where("D"));
        if (auto v = get("ar")) {
            cfg.dgp.ar = parse_number(*v, where("ar"));
        }
        if (auto v = get("sigma")) {
            cfg.dgp.sigma = parse_number(*v, where("sigma"));
        }
        if (auto v = get("covariates")) {
            cfg.dgp.covariates = covariate_model_from_name(*v);
        }
        if (auto v = get("covariate_ar")) {
            cfg.dgp.covariate_ar = parse_number(*v, where("covariate_ar"));
        }
        if (auto v = get("seed")) {
            cfg.dgp.seed = parse_count(*v, where("seed"));
        }
        cfg.options.critical_seed = cfg.dgp.seed;
        if (auto v = get("critical_seed")) {
            cfg.options.critical_seed = parse_count(*v, where("critical_seed"));
        }
        if (auto v = get("alpha")) {
            cfg.options.alpha = parse_number(*v, where("alpha"));
        }
        if (auto v = get("B")) {
            cfg.options.B = parse_count(*v, where("B"));
        }
        if (auto v = get("R")) {
            cfg.options.R = parse_count(*v, where("R"));
        }
        if (auto v = get("kernel")) {
            cfg.options.kernel = kernel_from_name(*v);
        }
        if (auto v = get("hac.kernel")) {
            cfg.options.hac.cov_kernel = cov_kernel_from_name(*v);
        }
        if (auto v = get("hac.bandwidth")) {
            cfg.options.hac.bandwidth = parse_number(*v, where("hac.bandwidth"));
        }
        if (auto v = get("hac.pilot_h")) {
            cfg.options.hac.pilot_bandwidth = parse_number(*v, where("hac.pilot_h"));
        }
        if (auto v = get("hac.pooled")) {
            cfg.options.hac.pooled = parse_bool(*v, where("hac.pooled"));
        }
        if (auto v = get("grid")) {
            if (*v != "app" && *v != "custom") {
                throw ParseError(where("grid") + ": expected app or custom");
            }
            cfg.grid.application = *v == "app";
        }
        if (auto v = get("grid.u_step")) {
            cfg.grid.u_step = parse_count(*v, where("grid.u_step"));
        }
        if (auto v = get("grid.h")) {
            cfg.grid.h_values = parse_number_list(*v, where("grid.h"));
        }
        if (auto v = get("grid.h_min")) {
            cfg.grid.h_min = parse_number(*v, where("grid.h_min"));
        }

        std::map<std::string, CoefficientFunction> curves;
        for (const auto& [key, value] : entries) {
            if (key.rfind("curve.", 0) != 0) {
                continue;
            }
            used.insert(key);
            CoefficientFunction fn;
            for (const auto& coord : split(value.first, ';')) {
                try {
                    fn.coords.push_back(parse_curve(coord));
                } catch (const Error& e) {
                    throw ParseError(where(key) + ": " + e.what());
                }
            }
            curves.emplace(key.substr(6), std::move(fn));
        }
        const auto unit_names = split(require("units"), ',');
        if (unit_names.size() != cfg.dgp.N) {
            throw ParseError(where("units") + ": lists " + std::to_string(unit_names.size()) + " units but N = " +
                             std::to_string(cfg.dgp.N));
        }
        std::vector<std::string> order;
        std::vector<std::size_t> groups;
        for (const auto& name : unit_names) {
            auto it = curves.find(name);
            if (it == curves.end()) {
                throw ParseError(where("units") + ": no curve named '" + name + "'");
            }
            cfg.dgp.unit_curves.push_back(it->second);
            auto pos = std::find(order.begin(), order.end(), name);
            if (pos == order.end()) {
                order.push_back(name);
                pos = order.end() - 1;
            }
            groups.push_back(static_cast<std::size_t>(pos - order.begin()) + 1);
        }
        cfg.dgp.group_assignment = std::move(groups);

        if (cfg.kind == ExperimentKind::Power) {
            PowerDeviation dev;
            const std::size_t unit = parse_count(require("power.unit"), where("power.unit"));
            const std::size_t coord = parse_count(require("power.coordinate"), where("power.coordinate"));
            if (unit < 1 || unit > cfg.dgp.N || coord < 1 || coord > cfg.dgp.D) {
                throw ParseError("config: power.unit and power.coordinate are 1-based and must be in range");
            }
            dev.unit = unit - 1;
            dev.coordinate = coord - 1;
            const Curve bump = parse_curve(require("power.bump"));
            if (bump.terms.size() != 1 || bump.terms[0].kind != CurveTerm::Kind::Bump) {
                throw ParseError(where("power.bump") + ": expected a single bump(...) term");
            }
            dev.bump = bump.terms[0];
            cfg.deviation = dev;
            cfg.scales = parse_number_list(require("power.scales"), where("power.scales"));
        }
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }

    for (const auto& [key, value] : entries) {
        if (!used.contains(key)) {
            throw ParseError("config line " + std::to_string(value.second) + ": unknown key '" + key + "'");
        }
    }
    cfg.dgp.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open experiment config '" + path.string() + "'");
    }
    return parse_experiment_config(in);
}

}  // namespace panelms
