#include "panelms/csv.hpp"

#include "panelms/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace panelms {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        const auto piece = line.substr(start, comma == std::string_view::npos ? line.size() - start
                                                                             : comma - start);
        out.emplace_back(trim(piece));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

std::string where(std::size_t row, const std::string& column) {
    return "row " + std::to_string(row) + ", column '" + column + "'";
}

double parse_number(const std::string& field, std::size_t row, const std::string& column) {
    if (field.empty()) {
        throw ParseError("missing cell at " + where(row, column));
    }
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (*first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ParseError("non-numeric entry '" + field + "' at " + where(row, column));
    }
    if (!std::isfinite(value)) {
        throw ParseError("non-finite entry '" + field + "' at " + where(row, column));
    }
    return value;
}

std::size_t parse_time(const std::string& field, std::size_t row, const std::string& column) {
    if (field.empty()) {
        throw ParseError("missing cell at " + where(row, column));
    }
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || value < 1) {
        throw ParseError("time index must be a positive integer, got '" + field + "' at " +
                         where(row, column));
    }
    return static_cast<std::size_t>(value);
}

struct Row {
    std::size_t line;
    std::vector<std::string> fields;
};

std::vector<Row> read_rows(std::istream& in, std::vector<std::string>& header) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
            static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
            line.erase(0, 3);
        }
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_fields(line);
        if (!have_header) {
            header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != header.size()) {
            throw ParseError("row " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        rows.push_back(Row{line_no, std::move(fields)});
    }
    if (!have_header) {
        throw ParseError("empty CSV input: missing header");
    }
    if (rows.empty()) {
        throw ParseError("CSV input has a header but no data rows");
    }
    return rows;
}

Panel parse_long(std::istream& in) {
    std::vector<std::string> header;
    const auto rows = read_rows(in, header);
    if (header.size() < 4 || header[0] != "unit" || header[1] != "time" || header[2] != "y") {
        throw ParseError("long layout header must be 'unit,time,y,x1,...,xD'");
    }
    const std::size_t D = header.size() - 3;

    struct Obs {
        double y;
        std::vector<double> x;
        std::size_t line;
    };
    std::vector<std::string> order;
    std::unordered_map<std::string, std::map<std::size_t, Obs>> by_unit;

    for (const auto& row : rows) {
        const auto& unit = row.fields[0];
        if (unit.empty()) {
            throw ParseError("missing cell at " + where(row.line, "unit"));
        }
        const auto t = parse_time(row.fields[1], row.line, "time");
        Obs obs{parse_number(row.fields[2], row.line, "y"), std::vector<double>(D), row.line};
        for (std::size_t d = 0; d < D; ++d) {
            obs.x[d] = parse_number(row.fields[3 + d], row.line, header[3 + d]);
        }
        auto [it, inserted_unit] = by_unit.try_emplace(unit);
        if (inserted_unit) {
            order.push_back(unit);
        }
        if (!it->second.emplace(t, std::move(obs)).second) {
            throw ParseError("duplicate (unit, time) key ('" + unit + "', " + std::to_string(t) +
                             ") at row " + std::to_string(row.line));
        }
    }

    const auto& first = by_unit.at(order.front());
    const std::size_t T = first.size();
    for (const auto& unit : order) {
        const auto& series = by_unit.at(unit);
        if (series.size() != T) {
            throw ParseError("ragged time series: unit '" + unit + "' has " +
                             std::to_string(series.size()) + " observations but unit '" +
                             order.front() + "' has " + std::to_string(T));
        }
        std::size_t expected = 1;
        for (const auto& [t, obs] : series) {
            if (t != expected) {
                throw ParseError("unit '" + unit + "': time index " + std::to_string(expected) +
                                 " is missing (time must run 1.." + std::to_string(T) + ")");
            }
            ++expected;
        }
    }

    Eigen::MatrixXd y(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(T));
    Eigen::MatrixXd x(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(D));
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& series = by_unit.at(order[i]);
        for (const auto& [t, obs] : series) {
            const auto col = static_cast<Eigen::Index>(t - 1);
            y(static_cast<Eigen::Index>(i), col) = obs.y;
            for (std::size_t d = 0; d < D; ++d) {
                const auto dd = static_cast<Eigen::Index>(d);
                if (i == 0) {
                    x(col, dd) = obs.x[d];
                } else if (x(col, dd) != obs.x[d]) {
                    throw ParseError("covariate '" + header[3 + d] + "' differs across units at time " +
                                     std::to_string(t) + " (row " + std::to_string(obs.line) +
                                     "); covariates must be common to all units");
                }
            }
        }
    }
    return Panel(std::move(y), std::move(x), order);
}

Panel parse_wide(std::istream& in) {
    std::vector<std::string> header;
    const auto rows = read_rows(in, header);
    if (header.empty() || header[0] != "time") {
        throw ParseError("wide layout header must start with 'time'");
    }
    std::vector<std::size_t> y_cols;
    std::vector<std::size_t> x_cols;
    std::vector<std::string> labels;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const auto& name = header[c];
        if (name.rfind("y_", 0) == 0 && name.size() > 2) {
            if (!x_cols.empty()) {
                throw ParseError("wide layout: response column '" + name +
                                 "' must precede covariate columns");
            }
            y_cols.push_back(c);
            labels.push_back(name.substr(2));
        } else if (name.rfind("x", 0) == 0) {
            x_cols.push_back(c);
        } else {
            throw ParseError("wide layout: unrecognized column '" + name +
                             "' (expected y_<label> or x_<k>)");
        }
    }
    if (y_cols.empty()) {
        throw ParseError("wide layout: no y_<label> columns");
    }
    if (x_cols.empty()) {
        throw ParseError("wide layout: no covariate columns");
    }

    std::map<std::size_t, const Row*> by_time;
    for (const auto& row : rows) {
        const auto t = parse_time(row.fields[0], row.line, "time");
        if (!by_time.emplace(t, &row).second) {
            throw ParseError("duplicate time index " + std::to_string(t) + " at row " +
                             std::to_string(row.line));
        }
    }
    const std::size_t T = by_time.size();
    std::size_t expected = 1;
    for (const auto& [t, row] : by_time) {
        if (t != expected) {
            throw ParseError("wide layout: time index " + std::to_string(expected) +
                             " is missing (time must run 1.." + std::to_string(T) + ")");
        }
        ++expected;
    }

    Eigen::MatrixXd y(static_cast<Eigen::Index>(y_cols.size()), static_cast<Eigen::Index>(T));
    Eigen::MatrixXd x(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(x_cols.size()));
    for (const auto& [t, row] : by_time) {
        const auto col = static_cast<Eigen::Index>(t - 1);
        for (std::size_t i = 0; i < y_cols.size(); ++i) {
            y(static_cast<Eigen::Index>(i), col) =
                parse_number(row->fields[y_cols[i]], row->line, header[y_cols[i]]);
        }
        for (std::size_t d = 0; d < x_cols.size(); ++d) {
            x(col, static_cast<Eigen::Index>(d)) =
                parse_number(row->fields[x_cols[d]], row->line, header[x_cols[d]]);
        }
    }
    return Panel(std::move(y), std::move(x), std::move(labels));
}

}  // namespace

CsvLayout layout_from_name(std::string_view name) {
    if (name == "long") {
        return CsvLayout::Long;
    }
    if (name == "wide") {
        return CsvLayout::Wide;
    }
    throw InputError("unknown CSV layout '" + std::string(name) + "' (expected long or wide)");
}

std::string_view layout_name(CsvLayout layout) {
    return layout == CsvLayout::Long ? "long" : "wide";
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw Error("format_double: conversion failed");
    }
    return std::string(buf, ptr);
}

Panel panel_from_csv(std::istream& in, CsvLayout layout) {
    try {
        return layout == CsvLayout::Long ? parse_long(in) : parse_wide(in);
    } catch (const PreconditionError& e) {
        throw ParseError(e.what());
    }
}

Panel panel_from_csv(const std::filesystem::path& path, CsvLayout layout) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path.string() + "'");
    }
    try {
        return panel_from_csv(in, layout);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void panel_to_csv(const Panel& panel, std::ostream& out, CsvLayout layout) {
    const auto N = panel.n_units();
    const auto T = panel.n_time();
    const auto D = panel.n_covariates();
    const auto& y = panel.y();
    const auto& x = panel.x();
    if (layout == CsvLayout::Long) {
        out << "unit,time,y";
        for (std::size_t d = 1; d <= D; ++d) {
            out << ",x" << d;
        }
        out << '\n';
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t t = 0; t < T; ++t) {
                out << panel.unit_labels()[i] << ',' << (t + 1) << ','
                    << format_double(y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)));
                for (std::size_t d = 0; d < D; ++d) {
                    out << ','
                        << format_double(x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d)));
                }
                out << '\n';
            }
        }
        return;
    }
    out << "time";
    for (const auto& label : panel.unit_labels()) {
        out << ",y_" << label;
    }
    for (std::size_t d = 1; d <= D; ++d) {
        out << ",x_" << d;
    }
    out << '\n';
    for (std::size_t t = 0; t < T; ++t) {
        out << (t + 1);
        for (std::size_t i = 0; i < N; ++i) {
            out << ',' << format_double(y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)));
        }
        for (std::size_t d = 0; d < D; ++d) {
            out << ',' << format_double(x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d)));
        }
        out << '\n';
    }
}

void panel_to_csv(const Panel& panel, const std::filesystem::path& path, CsvLayout layout) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    panel_to_csv(panel, out, layout);
    if (!out) {
        throw InputError("write to '" + path.string() + "' failed");
    }
}

}  // namespace panelms
