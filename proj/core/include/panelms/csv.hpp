#pragma once

#include "panelms/panel.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace panelms {

/**
 * Panel CSV layouts.
 *
 * long: header `unit,time,y,x1,...,xD`; one row per (unit, time) with time a
 *       complete 1..T sequence per unit. Covariates are common across units,
 *       so every unit must report identical x values at a given time.
 * wide: header `time,y_<label>...,x_1,...,x_D`; one row per time point.
 */
enum class CsvLayout { Long, Wide };

CsvLayout layout_from_name(std::string_view name);
std::string_view layout_name(CsvLayout layout);

/// Throws ParseError naming the offending row/column. Units are ordered by
/// first appearance in the file.
Panel panel_from_csv(const std::filesystem::path& path, CsvLayout layout);
Panel panel_from_csv(std::istream& in, CsvLayout layout);

/// Writes numbers in shortest round-trip form so that reading the file back
/// reproduces every value bit for bit.
void panel_to_csv(const Panel& panel, const std::filesystem::path& path, CsvLayout layout);
void panel_to_csv(const Panel& panel, std::ostream& out, CsvLayout layout);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

}  // namespace panelms
