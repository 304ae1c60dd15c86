#include "kdvstab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "kdvstab/errors.hpp"

namespace kdvstab {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void write_file_atomic(const std::string& path, const std::string& content)
{
    fs::path target(path);
    std::error_code ec;
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path(), ec);
        if (ec)
            fail(ErrorKind::io_failure, "cannot create " + target.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            fail(ErrorKind::io_failure, "cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out)
            fail(ErrorKind::io_failure, "write to " + tmp.string() + " failed");
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        fail(ErrorKind::io_failure, "cannot rename into " + target.string() + ": " + ec.message());
    }
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorKind::io_failure, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> parse_key_values(const std::string& text)
{
    auto trim = [](std::string s) {
        auto issp = [](unsigned char c) { return std::isspace(c); };
        s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), issp));
        s.erase(std::find_if_not(s.rbegin(), s.rend(), issp).base(), s.end());
        return s;
    };
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::invalid_argument, "config line " + std::to_string(lineno) + " has no '='");
        std::string key = trim(line.substr(0, eq));
        if (key.empty())
            fail(ErrorKind::invalid_argument, "config line " + std::to_string(lineno) + " has an empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

std::string format_double(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string fnv1a64_hex(const std::string& data)
{
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

FeedbackDocument make_feedback_document(const GramianOperator& gram, const FeedbackLaw& law)
{
    FeedbackDocument doc;
    const ModeSet& modes = *law.modes;
    doc.length = modes.front().base.length;
    doc.omega = law.omega;
    doc.side = law.side;
    doc.scalar_modes = static_cast<int>(modes.size() / 2);
    for (const auto& m : modes) {
        doc.n.push_back(m.base.n);
        doc.sign.push_back(m.sign);
        doc.lambda.push_back(m.base.lambda);
        doc.traces.push_back(control_trace(m, law.side));
    }
    doc.gain = law.gain;
    doc.min_pivot_ratio = gram.min_pivot_ratio;
    doc.hermitian_defect = hermitian_defect(gram.matrix);
    doc.checksum = fnv1a64_hex(to_json(doc).dump());
    return doc;
}

ordered_json to_json(const FeedbackDocument& doc)
{
    ordered_json j;
    j["format"] = "kdvstab-feedback-1";
    j["length"] = doc.length;
    j["omega"] = doc.omega;
    j["control_side"] = to_string(doc.side);
    j["scalar_modes"] = doc.scalar_modes;
    ordered_json modes = ordered_json::array();
    for (std::size_t k = 0; k < doc.n.size(); ++k) {
        ordered_json m;
        m["n"] = doc.n[k];
        m["sigma"] = doc.sign[k];
        m["lambda"] = doc.lambda[k];
        m["mu"] = doc.sign[k] * doc.lambda[k];
        m["trace"] = {doc.traces[k].real(), doc.traces[k].imag()};
        modes.push_back(m);
    }
    j["modes"] = modes;
    ordered_json gain = ordered_json::array();
    for (Eigen::Index k = 0; k < doc.gain.size(); ++k)
        gain.push_back({doc.gain[k].real(), doc.gain[k].imag()});
    j["gain"] = gain;
    j["gramian"] = {{"min_pivot_ratio", doc.min_pivot_ratio}, {"hermitian_defect", doc.hermitian_defect}};
    if (!doc.checksum.empty())
        j["checksum"] = doc.checksum;
    return j;
}

FeedbackDocument feedback_document_from_json(const ordered_json& j)
{
    try {
        if (j.at("format").get<std::string>() != "kdvstab-feedback-1")
            fail(ErrorKind::io_failure, "unsupported feedback document format");
        FeedbackDocument doc;
        doc.length = j.at("length").get<double>();
        doc.omega = j.at("omega").get<double>();
        doc.side = parse_control_side(j.at("control_side").get<std::string>());
        doc.scalar_modes = j.at("scalar_modes").get<int>();
        for (const auto& m : j.at("modes")) {
            doc.n.push_back(m.at("n").get<int>());
            doc.sign.push_back(m.at("sigma").get<int>());
            doc.lambda.push_back(m.at("lambda").get<double>());
            doc.traces.emplace_back(m.at("trace").at(0).get<double>(), m.at("trace").at(1).get<double>());
        }
        const auto& gain = j.at("gain");
        doc.gain.resize(static_cast<Eigen::Index>(gain.size()));
        for (std::size_t k = 0; k < gain.size(); ++k)
            doc.gain[static_cast<Eigen::Index>(k)] = cplx(gain[k].at(0).get<double>(), gain[k].at(1).get<double>());
        doc.min_pivot_ratio = j.at("gramian").at("min_pivot_ratio").get<double>();
        doc.hermitian_defect = j.at("gramian").at("hermitian_defect").get<double>();
        std::string stored = j.at("checksum").get<std::string>();
        std::string actual = fnv1a64_hex(to_json(doc).dump());
        if (stored != actual)
            fail(ErrorKind::io_failure, "feedback document checksum mismatch (stored " + stored +
                                            ", computed " + actual + ")");
        if (doc.gain.size() != static_cast<Eigen::Index>(doc.n.size()) ||
            doc.n.size() != 2 * static_cast<std::size_t>(doc.scalar_modes))
            fail(ErrorKind::io_failure, "feedback document has inconsistent sizes");
        doc.checksum = stored;
        return doc;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::io_failure, std::string("malformed feedback document: ") + e.what());
    }
}

std::string svg_line_plots(const std::string& title, const std::string& x_label,
                           const std::vector<PlotSeries>& panels)
{
    const double width = 720.0, panel_h = 240.0, left = 70.0, right = 20.0, top = 40.0, gap = 50.0;
    const double plot_w = width - left - right;
    const double height = top + panels.size() * (panel_h + gap) + 10.0;
    std::ostringstream svg;
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };
    auto label = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3g", v);
        return std::string(buf);
    };
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
        << num(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
        << "</text>\n";
    for (std::size_t p = 0; p < panels.size(); ++p) {
        const PlotSeries& s = panels[p];
        const double y0 = top + p * (panel_h + gap);
        double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
        bool any = false;
        for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]))
                continue;
            if (!any) {
                xmin = xmax = s.x[k];
                ymin = ymax = s.y[k];
                any = true;
            }
            xmin = std::min(xmin, s.x[k]);
            xmax = std::max(xmax, s.x[k]);
            ymin = std::min(ymin, s.y[k]);
            ymax = std::max(ymax, s.y[k]);
        }
        if (xmax == xmin)
            xmax = xmin + 1.0;
        if (ymax == ymin) {
            ymin -= 0.5;
            ymax += 0.5;
        }
        auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
        auto py = [&](double y) { return y0 + panel_h - (y - ymin) / (ymax - ymin) * panel_h; };
        svg << "<rect x=\"" << num(left) << "\" y=\"" << num(y0) << "\" width=\"" << num(plot_w)
            << "\" height=\"" << num(panel_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << num(left + 6) << "\" y=\"" << num(y0 + 16) << "\">" << s.label << "</text>\n";
        svg << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y0 + 4) << "\" text-anchor=\"end\">"
            << label(ymax) << "</text>\n";
        svg << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y0 + panel_h) << "\" text-anchor=\"end\">"
            << label(ymin) << "</text>\n";
        svg << "<text x=\"" << num(left) << "\" y=\"" << num(y0 + panel_h + 16) << "\">" << label(xmin)
            << "</text>\n";
        svg << "<text x=\"" << num(left + plot_w) << "\" y=\"" << num(y0 + panel_h + 16)
            << "\" text-anchor=\"end\">" << label(xmax) << "</text>\n";
        svg << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(y0 + panel_h + 16)
            << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
        if (!any)
            continue;
        svg << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.2\" points=\"";
        for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k)
            if (std::isfinite(s.x[k]) && std::isfinite(s.y[k]))
                svg << num(px(s.x[k])) << ',' << num(py(s.y[k])) << ' ';
        svg << "\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace kdvstab
