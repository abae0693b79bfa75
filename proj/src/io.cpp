#include "toricost/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "toricost/errors.hpp"

namespace toricost
{

namespace
{

void dump_into(const Json& j, int indent, int depth, std::string& out)
{
    const bool pretty = indent >= 0;
    const std::string pad = pretty ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ')
                                   : std::string();
    const std::string close_pad
        = pretty ? std::string(static_cast<std::size_t>(indent * depth), ' ') : std::string();
    const char* sep = pretty ? ",\n" : ",";
    const char* open_nl = pretty ? "\n" : "";

    switch (j.type())
    {
    case Json::value_t::object: {
        if (j.empty())
        {
            out += "{}";
            return;
        }
        out += "{";
        out += open_nl;
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it)
        {
            if (!first)
                out += sep;
            first = false;
            out += pad;
            out += Json(it.key()).dump();
            out += pretty ? ": " : ":";
            dump_into(it.value(), indent, depth + 1, out);
        }
        out += open_nl;
        out += close_pad;
        out += "}";
        return;
    }
    case Json::value_t::array: {
        if (j.empty())
        {
            out += "[]";
            return;
        }
        // Arrays of scalars stay on one line.
        const bool flat = std::all_of(j.begin(), j.end(), [](const Json& v) {
            return !v.is_structured();
        });
        out += "[";
        bool first = true;
        for (const auto& v : j)
        {
            if (!first)
                out += flat ? ", " : sep;
            else if (!flat)
                out += open_nl;
            first = false;
            if (!flat)
                out += pad;
            dump_into(v, indent, depth + 1, out);
        }
        if (!flat)
        {
            out += open_nl;
            out += close_pad;
        }
        out += "]";
        return;
    }
    case Json::value_t::number_float:
        out += format_double(j.get<double>());
        return;
    default:
        out += j.dump();
        return;
    }
}

std::vector<std::string> split(const std::string& line, char delim)
{
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, delim))
        parts.push_back(cur);
    if (!line.empty() && line.back() == delim)
        parts.emplace_back();
    return parts;
}

double parse_double(const std::string& s)
{
    std::size_t used = 0;
    double v = 0.0;
    try
    {
        v = std::stod(s, &used);
    }
    catch (const std::exception&)
    {
        throw ValidationError("not a number: '" + s + "'");
    }
    if (used != s.size())
        throw ValidationError("not a number: '" + s + "'");
    return v;
}

// Piecewise-linear blue -> teal -> yellow ramp.
std::string colour(double u)
{
    u = std::clamp(u, 0.0, 1.0);
    constexpr double stops[3][3] = {{68, 1, 84}, {33, 145, 140}, {253, 231, 37}};
    const double x = u * 2.0;
    const int lo = std::min(1, static_cast<int>(x));
    const double f = x - lo;
    int rgb[3];
    for (int c = 0; c < 3; ++c)
        rgb[c] = static_cast<int>(std::lround(stops[lo][c] + f * (stops[lo + 1][c] - stops[lo][c])));
    return fmt::format("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2]);
}

constexpr double svg_width = 800.0;
constexpr double svg_height = 500.0;
constexpr double margin_left = 80.0;
constexpr double margin_right = 30.0;
constexpr double margin_top = 30.0;
constexpr double margin_bottom = 60.0;

std::string svg_header()
{
    return fmt::format("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                       "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" "
                       "height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n"
                       "<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n",
                       svg_width, svg_height, svg_width, svg_height, svg_width, svg_height);
}

std::string axis_labels(double x_lo, double x_hi, double y_lo, double y_hi,
                        const std::string& x_name, const std::string& y_name)
{
    const double x0 = margin_left;
    const double x1 = svg_width - margin_right;
    const double y0 = svg_height - margin_bottom;
    const double y1 = margin_top;
    std::string s;
    s += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
                     "stroke=\"black\"/>\n",
                     x0, y0, x1, y0);
    s += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
                     "stroke=\"black\"/>\n",
                     x0, y0, x0, y1);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\">{:.4g}</text>\n", x0,
                     y0 + 18, x_lo);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\" "
                     "text-anchor=\"end\">{:.4g}</text>\n",
                     x1, y0 + 18, x_hi);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\" "
                     "text-anchor=\"end\">{:.4g}</text>\n",
                     x0 - 6, y0, y_lo);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\" "
                     "text-anchor=\"end\">{:.4g}</text>\n",
                     x0 - 6, y1 + 10, y_hi);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"14\" "
                     "text-anchor=\"middle\">{}</text>\n",
                     0.5 * (x0 + x1), svg_height - 20, x_name);
    s += fmt::format("<text x=\"20\" y=\"{:.2f}\" font-size=\"14\" text-anchor=\"middle\" "
                     "transform=\"rotate(-90 20 {:.2f})\">{}</text>\n",
                     0.5 * (y0 + y1), 0.5 * (y0 + y1), y_name);
    return s;
}

}  // namespace

std::string format_double(double x)
{
    if (std::isnan(x))
        return "NaN";
    if (std::isinf(x))
        return x > 0 ? "Infinity" : "-Infinity";
    return fmt::format("{:.17g}", x);
}

std::string dump_json(const Json& j, int indent)
{
    std::string out;
    dump_into(j, indent, 0, out);
    if (indent >= 0)
        out += "\n";
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out)
        {
            out.close();
            std::filesystem::remove(tmp);
            throw std::runtime_error("failed writing '" + tmp.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json to_json(const CostEstimate& e, const std::string& system, const std::string& cost)
{
    Json j;
    j["value"] = e.value;
    j["std_error"] = e.std_error;
    j["n_samples"] = e.n_samples;
    j["n_failed"] = e.n_failed;
    j["t"] = std::vector<double>(e.t.begin(), e.t.end());
    j["seed"] = e.seed;
    j["system"] = system;
    j["cost"] = cost;
    return j;
}

std::string scan_csv(const ScanResult& r)
{
    std::string out;
    for (std::size_t k = 0; k < r.grid.dimension(); ++k)
        out += fmt::format("t_{},", k + 1);
    out += "value,std_error\n";
    for (std::size_t i = 0; i < r.estimates.size(); ++i)
    {
        const TimeVector t = r.grid.point(i);
        for (const double v : t)
            out += format_double(v) + ",";
        out += format_double(r.estimates[i].value) + "," + format_double(r.estimates[i].std_error)
               + "\n";
    }
    return out;
}

Json scan_sidecar(const ScanResult& r, const std::string& system, const std::string& cost,
                  std::size_t n_samples, std::uint64_t seed)
{
    Json j;
    j["system"] = system;
    j["cost"] = cost;
    j["n_samples"] = n_samples;
    j["seed"] = seed;
    Json axes = Json::array();
    for (const auto& a : r.grid.axes())
        axes.push_back(Json{{"t_min", a.t_min}, {"t_max", a.t_max}, {"steps", a.steps}});
    j["grid"] = axes;
    j["verdict"] = to_string(r.verdict);
    j["zero_threshold"] = r.zero_threshold;
    j["positivity_margin"] = r.positivity_margin;
    j["cost_scale"] = r.cost_scale;
    Json zeros = Json::array();
    for (const auto& z : r.zeros)
        zeros.push_back(std::vector<double>(z.begin(), z.end()));
    j["zeros"] = zeros;
    return j;
}

DiscreteMeasure measure_from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("points") || !j.contains("weights"))
        throw ValidationError("measure JSON needs 'points' and 'weights'");
    DiscreteMeasure mu;
    try
    {
        mu.points = j.at("points").get<std::vector<std::vector<double>>>();
        mu.weights = j.at("weights").get<std::vector<double>>();
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ValidationError(std::string("malformed measure JSON: ") + e.what());
    }
    mu.validate();
    return mu;
}

Json measure_to_json(const DiscreteMeasure& mu)
{
    Json j;
    j["points"] = mu.points;
    j["weights"] = mu.weights;
    return j;
}

std::string matrix_csv(const Matrix& m)
{
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
    {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            out += (c ? "," : "") + format_double(m(i, c));
        out += "\n";
    }
    return out;
}

ScanTable parse_scan_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.empty())
        throw ValidationError("scan CSV is empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    const auto header = split(line, ',');
    if (header.size() < 3 || header[header.size() - 2] != "value"
        || header.back() != "std_error")
        throw ValidationError("scan CSV header must be t_1,...,t_n,value,std_error");
    ScanTable table;
    table.n = header.size() - 2;
    for (std::size_t k = 0; k < table.n; ++k)
        if (header[k] != "t_" + std::to_string(k + 1))
            throw ValidationError("scan CSV header must be t_1,...,t_n,value,std_error");

    while (std::getline(in, line))
    {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size())
            throw ValidationError("scan CSV row has " + std::to_string(cells.size())
                                  + " columns, expected " + std::to_string(header.size()));
        std::vector<double> t(table.n);
        for (std::size_t k = 0; k < table.n; ++k)
            t[k] = parse_double(cells[k]);
        table.times.push_back(std::move(t));
        table.values.push_back(parse_double(cells[table.n]));
        table.std_errors.push_back(parse_double(cells[table.n + 1]));
    }
    if (table.values.empty())
        throw ValidationError("scan CSV has no rows");
    return table;
}

std::string render_svg(const ScanTable& table)
{
    if (table.values.empty())
        throw ValidationError("nothing to plot");
    const double x0 = margin_left;
    const double x1 = svg_width - margin_right;
    const double y0 = svg_height - margin_bottom;
    const double y1 = margin_top;

    if (table.n == 1)
    {
        double t_lo = table.times.front()[0], t_hi = t_lo;
        double v_lo = table.values.front(), v_hi = v_lo;
        for (std::size_t i = 0; i < table.values.size(); ++i)
        {
            t_lo = std::min(t_lo, table.times[i][0]);
            t_hi = std::max(t_hi, table.times[i][0]);
            v_lo = std::min(v_lo, table.values[i]);
            v_hi = std::max(v_hi, table.values[i]);
        }
        const double t_span = t_hi > t_lo ? t_hi - t_lo : 1.0;
        const double v_span = v_hi > v_lo ? v_hi - v_lo : 1.0;
        std::string s = svg_header();
        s += axis_labels(t_lo, t_hi, v_lo, v_hi, "t", "C_t");
        s += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < table.values.size(); ++i)
        {
            const double px = x0 + (table.times[i][0] - t_lo) / t_span * (x1 - x0);
            const double py = y0 - (table.values[i] - v_lo) / v_span * (y0 - y1);
            s += fmt::format("{}{:.3f},{:.3f}", i ? " " : "", px, py);
        }
        s += "\"/>\n</svg>\n";
        return s;
    }

    if (table.n == 2)
    {
        std::set<double> t1s, t2s;
        for (const auto& t : table.times)
        {
            t1s.insert(t[0]);
            t2s.insert(t[1]);
        }
        if (t1s.size() * t2s.size() != table.values.size())
            throw ValidationError("scan CSV rows do not form a full 2-d grid");
        const std::vector<double> a(t1s.begin(), t1s.end());
        const std::vector<double> b(t2s.begin(), t2s.end());
        std::map<double, std::size_t> ia, ib;
        for (std::size_t i = 0; i < a.size(); ++i)
            ia[a[i]] = i;
        for (std::size_t i = 0; i < b.size(); ++i)
            ib[b[i]] = i;
        const auto [v_lo_it, v_hi_it] = std::minmax_element(table.values.begin(), table.values.end());
        const double v_lo = *v_lo_it;
        const double v_span = *v_hi_it > v_lo ? *v_hi_it - v_lo : 1.0;
        const double cw = (x1 - x0) / static_cast<double>(a.size());
        const double ch = (y0 - y1) / static_cast<double>(b.size());

        std::string s = svg_header();
        s += axis_labels(a.front(), a.back(), b.front(), b.back(), "t_1", "t_2");
        for (std::size_t i = 0; i < table.values.size(); ++i)
        {
            const double px = x0 + static_cast<double>(ia[table.times[i][0]]) * cw;
            const double py = y0 - static_cast<double>(ib[table.times[i][1]] + 1) * ch;
            s += fmt::format("<rect class=\"cell\" x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" "
                             "fill=\"{}\"/>\n",
                             px, py, cw, ch, colour((table.values[i] - v_lo) / v_span));
        }
        s += "</svg>\n";
        return s;
    }
    throw ValidationError("plots support n = 1 (line) or n = 2 (heatmap) scans only");
}

}  // namespace toricost
