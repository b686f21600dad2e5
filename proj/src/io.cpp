#include "ehlab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "ehlab/errors.hpp"

namespace ehlab {

std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, res.ptr);
    // bare integers would re-parse as json integers; keep the type stable
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

namespace {

std::string escape_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    out += '"';
    return out;
}

void dump_rec(const ojson& j, int indent, int depth, std::string& out) {
    const std::string pad(static_cast<size_t>(indent) * depth, ' ');
    const std::string pad_in(static_cast<size_t>(indent) * (depth + 1), ' ');
    switch (j.type()) {
    case ojson::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad_in + escape_string(it.key()) + ": ";
            dump_rec(it.value(), indent, depth + 1, out);
        }
        out += "\n" + pad + "}";
        return;
    }
    case ojson::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        bool first = true;
        for (const auto& v : j) {
            if (!first) out += ",\n";
            first = false;
            out += pad_in;
            dump_rec(v, indent, depth + 1, out);
        }
        out += "\n" + pad + "]";
        return;
    }
    case ojson::value_t::string:
        out += escape_string(j.get<std::string>());
        return;
    case ojson::value_t::boolean:
        out += j.get<bool>() ? "true" : "false";
        return;
    case ojson::value_t::number_integer:
        out += std::to_string(j.get<std::int64_t>());
        return;
    case ojson::value_t::number_unsigned:
        out += std::to_string(j.get<std::uint64_t>());
        return;
    case ojson::value_t::number_float:
        out += format_double(j.get<double>());
        return;
    default:
        out += "null";
        return;
    }
}

} // namespace

std::string dump_json(const ojson& j, int indent) {
    std::string out;
    dump_rec(j, indent, 0, out);
    out += '\n';
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw ValidationError("write to '" + path + "' failed");
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

namespace {

void csv_header(std::string& out, int n, int m, bool velocity) {
    out += "t,chart_id";
    for (int i = 1; i <= n; ++i) out += ",b" + std::to_string(i);
    for (int i = 1; i <= m; ++i) out += ",f" + std::to_string(i);
    out += ",height";
    if (velocity) {
        for (int i = 1; i <= n; ++i) out += ",vb" + std::to_string(i);
        for (int i = 1; i <= m; ++i) out += ",vf" + std::to_string(i);
        out += ",arc_length";
    }
    out += ",status\n";
}

} // namespace

std::string lift_trace_csv(const BundleAtlas& atlas, const LiftTrace& trace) {
    const int n = atlas.base.dim, m = atlas.fiber.dim;
    std::string out;
    csv_header(out, n, m, false);
    for (size_t i = 0; i < trace.samples.size(); ++i) {
        const auto& s = trace.samples[i];
        out += format_double(s.t) + ',' + std::to_string(s.chart);
        for (int k = 0; k < n; ++k) out += ',' + format_double(s.b[k]);
        for (int k = 0; k < m; ++k) out += ',' + format_double(s.f[k]);
        out += ',' + format_double(s.height);
        out += ',';
        if (i + 1 == trace.samples.size()) out += lift_status_name(trace.status);
        out += '\n';
    }
    return out;
}

std::string geodesic_trace_csv(const GeodesicTrace& trace, int base_dim,
                               const std::function<double(int, const Vec&)>& height) {
    if (trace.samples.empty()) return "";
    const int d = static_cast<int>(trace.samples.front().x.size());
    const int n = base_dim, m = d - base_dim;
    std::string out;
    csv_header(out, n, m, true);
    for (size_t i = 0; i < trace.samples.size(); ++i) {
        const auto& s = trace.samples[i];
        out += format_double(s.t) + ',' + std::to_string(s.chart);
        for (int k = 0; k < d; ++k) out += ',' + format_double(s.x[k]);
        out += ',' + format_double(height ? height(s.chart, s.x)
                                          : std::abs(s.x[d - 1]));
        for (int k = 0; k < d; ++k) out += ',' + format_double(s.v[k]);
        out += ',' + format_double(s.arc);
        out += ',';
        if (i + 1 == trace.samples.size()) out += geo_status_name(trace.status);
        out += '\n';
    }
    return out;
}

} // namespace ehlab
