#pragma once

#include <string>
#include <vector>

namespace relubias {

struct SweepRow {
    double d = 0.0;
    double mean_error = 0.0;
    double std_error = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
};

std::string sweep_aggregate_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_aggregate_csv(const std::string& text);

// Self-contained log-log SVG: mean +- std markers, dashed bound envelopes,
// a slope -1/2 guide and a legend. Deterministic up to the version comment.
std::string render_sweep_svg(const std::vector<SweepRow>& rows, const std::string& style);

}  // namespace relubias
