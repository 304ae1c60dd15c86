#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kdvstab/gramian_feedback.hpp"

namespace kdvstab {

// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// Flat key=value configuration; '#' starts a comment, blank lines ignored.
std::map<std::string, std::string> parse_key_values(const std::string& text);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double x);

std::string fnv1a64_hex(const std::string& data);

// Feedback document shared by `synthesize` and `simulate`.
struct FeedbackDocument {
    double length = 0.0;
    double omega = 0.0;
    ControlSide side = ControlSide::left_eta;
    int scalar_modes = 0;
    std::vector<int> n;
    std::vector<int> sign;
    std::vector<double> lambda;
    std::vector<cplx> traces;
    Eigen::RowVectorXcd gain;
    double min_pivot_ratio = 0.0;
    double hermitian_defect = 0.0;
    std::string checksum;
};

FeedbackDocument make_feedback_document(const GramianOperator& gram, const FeedbackLaw& law);
nlohmann::ordered_json to_json(const FeedbackDocument& doc);
// Verifies the stored checksum; throws IoFailure on mismatch or malformed input.
FeedbackDocument feedback_document_from_json(const nlohmann::ordered_json& j);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Minimal stacked line plots (one panel per series) as an SVG document.
std::string svg_line_plots(const std::string& title, const std::string& x_label,
                           const std::vector<PlotSeries>& panels);

} // namespace kdvstab
