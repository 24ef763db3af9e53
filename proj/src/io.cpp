#include "hklab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

namespace hklab {

using nlohmann::json;

CheckSummary summarize(const std::vector<CheckReport>& reports) {
    CheckSummary s;
    for (const auto& r : reports) {
        ++s.total;
        if (r.skipped) {
            ++s.skipped;
            continue;
        }
        if (r.pass)
            ++s.passed;
        else
            ++s.failed;
        if (r.vacuous()) ++s.vacuous;
        if (r.margin < s.min_margin) {
            s.min_margin = r.margin;
            s.worst_instance = r.statement + ": " + r.instance;
        }
    }
    return s;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

namespace {

double parse_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    return std::stod(s);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: no newline translation
    if (!out) throw GraphError("cannot write file: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GraphError("cannot read file: " + path);
    return in;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(std::move(field));
    return out;
}

}  // namespace

GraphData load_graph_json(const std::string& path) {
    auto in = open_in(path);
    json j;
    in >> j;
    GraphData data;
    for (const auto& v : j.at("vertices"))
        data.vertices.push_back({v.at("id").get<std::string>(), v.at("m").get<double>()});
    for (const auto& e : j.at("edges"))
        data.edges.push_back({e.at("u").get<std::string>(), e.at("v").get<std::string>(),
                              e.at("b").get<double>()});
    if (j.contains("dirichlet"))
        for (const auto& d : j.at("dirichlet")) data.dirichlet.push_back(d.get<std::string>());
    return data;
}

void save_graph_json(const GraphData& data, const std::string& path) {
    json j;
    j["vertices"] = json::array();
    for (const auto& v : data.vertices) j["vertices"].push_back({{"id", v.id}, {"m", v.m}});
    j["edges"] = json::array();
    for (const auto& e : data.edges)
        j["edges"].push_back({{"u", e.u}, {"v", e.v}, {"b", e.b}});
    j["dirichlet"] = data.dirichlet;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_check_csv(const std::vector<CheckReport>& reports, const std::string& path) {
    auto out = open_out(path);
    out << "# hklab " << kVersion << "\n";
    out << "statement,instance,seed,lhs,rhs,margin,tolerance,log_scale,pass,vacuous,skipped,note\n";
    for (const auto& r : reports) {
        out << csv_escape(r.statement) << ',' << csv_escape(r.instance) << ',' << r.seed << ','
            << format_double(r.lhs) << ',' << format_double(r.rhs) << ','
            << format_double(r.margin) << ',' << format_double(r.tolerance) << ','
            << (r.log_scale ? 1 : 0) << ',' << (r.pass ? 1 : 0) << ',' << (r.vacuous() ? 1 : 0)
            << ',' << (r.skipped ? 1 : 0) << ',' << csv_escape(r.note) << "\n";
    }
}

std::vector<CheckReport> load_check_csv(const std::string& path) {
    auto in = open_in(path);
    std::vector<CheckReport> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("statement,", 0) == 0) continue;
        auto f = split_csv_row(line);
        if (f.size() != 12) throw GraphError("malformed check row in " + path);
        CheckReport r;
        r.statement = f[0];
        r.instance = f[1];
        r.seed = std::stoull(f[2]);
        r.lhs = parse_double(f[3]);
        r.rhs = parse_double(f[4]);
        r.margin = parse_double(f[5]);
        r.tolerance = parse_double(f[6]);
        r.log_scale = f[7] == "1";
        r.pass = f[8] == "1";
        r.skipped = f[10] == "1";
        r.note = f[11];
        out.push_back(std::move(r));
    }
    return out;
}

void write_bound_csv(const std::vector<BoundReport>& reports, const std::string& path) {
    auto out = open_out(path);
    out << "# hklab " << kVersion << "\n";
    out << "x,y,t,rho,log_lhs,log_rhs,log_margin,pass,vacuous\n";
    for (const auto& r : reports) {
        out << r.x << ',' << r.y << ',' << format_double(r.t) << ',' << format_double(r.rho)
            << ',' << format_double(r.log_lhs) << ',' << format_double(r.log_rhs) << ','
            << format_double(r.log_margin) << ',' << (r.pass ? 1 : 0) << ','
            << (r.vacuous ? 1 : 0) << "\n";
    }
}

std::vector<BoundReport> load_bound_csv(const std::string& path) {
    auto in = open_in(path);
    std::vector<BoundReport> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("x,", 0) == 0) continue;
        auto f = split_csv_row(line);
        if (f.size() != 9) throw GraphError("malformed bound row in " + path);
        BoundReport r;
        r.x = std::stoi(f[0]);
        r.y = std::stoi(f[1]);
        r.t = parse_double(f[2]);
        r.rho = parse_double(f[3]);
        r.log_lhs = parse_double(f[4]);
        r.log_rhs = parse_double(f[5]);
        r.log_margin = parse_double(f[6]);
        r.pass = f[7] == "1";
        r.vacuous = f[8] == "1";
        out.push_back(r);
    }
    return out;
}

void write_kernel_csv(const WeightedGraph& g, const std::vector<KernelSlice>& slices,
                      const std::string& path) {
    auto out = open_out(path);
    out << "# hklab " << kVersion << "\n";
    out << "t,x,y,p\n";
    for (const auto& slice : slices)
        for (int x = 0; x < g.vertex_count(); ++x)
            for (int y = 0; y < g.vertex_count(); ++y)
                out << format_double(slice.t) << ',' << csv_escape(g.id_of(x)) << ','
                    << csv_escape(g.id_of(y)) << ',' << format_double(slice.p(x, y)) << "\n";
}

void write_profile_csv(const WeightedGraph& g, const GeometryProfile& profile,
                       const std::string& path) {
    auto out = open_out(path);
    out << "# hklab " << kVersion << " center=" << csv_escape(g.id_of(profile.center)) << "\n";
    out << "R,volume,D_p,M_p,mu,theta,kappa,Gamma\n";
    for (const auto& row : profile.rows)
        out << format_double(row.radius) << ',' << format_double(row.volume) << ','
            << format_double(row.degree_mean) << ',' << format_double(row.inverse_measure_mean)
            << ',' << format_double(row.mu) << ',' << format_double(row.theta) << ',' << row.kappa
            << ',' << format_double(row.gamma) << "\n";
}

void write_sv_json(const WeightedGraph& g, const std::vector<SVEstimate>& estimates,
                   const std::string& path) {
    json j;
    j["version"] = kVersion;
    j["centers"] = json::array();
    for (const auto& e : estimates) {
        json c;
        c["id"] = g.id_of(e.center);
        c["r1"] = e.r1;
        c["r2"] = e.r2;
        c["n"] = e.n;
        c["d"] = e.d;
        c["sobolev"] = e.sobolev;
        c["doubling"] = e.doubling;
        c["converged"] = e.converged;
        c["pass"] = e.pass;
        c["note"] = e.note;
        c["per_radius"] = json::array();
        for (const auto& p : e.per_radius) {
            json row;
            row["R"] = p.radius;
            row["constant"] = p.constant;
            row["converged"] = p.converged;
            row["certificate"] = json::array();
            for (int i = 0; i < p.certificate.size(); ++i)
                if (p.certificate[i] != 0.0)
                    row["certificate"].push_back({{"id", g.id_of(i)}, {"u", p.certificate[i]}});
            c["per_radius"].push_back(std::move(row));
        }
        j["centers"].push_back(std::move(c));
    }
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

std::vector<SVEstimate> load_sv_json(const WeightedGraph& g, const std::string& path) {
    auto in = open_in(path);
    json j;
    in >> j;
    std::vector<SVEstimate> out;
    for (const auto& c : j.at("centers")) {
        SVEstimate e;
        e.center = g.index_of(c.at("id").get<std::string>());
        e.r1 = c.at("r1").get<double>();
        e.r2 = c.at("r2").get<double>();
        e.n = c.at("n").get<double>();
        e.d = c.at("d").get<double>();
        e.sobolev = c.at("sobolev").get<double>();
        e.doubling = c.at("doubling").get<double>();
        e.converged = c.at("converged").get<bool>();
        e.pass = c.at("pass").get<bool>();
        if (c.contains("per_radius"))
            for (const auto& row : c.at("per_radius")) {
                SobolevEstimate p;
                p.radius = row.at("R").get<double>();
                p.constant = row.at("constant").get<double>();
                p.converged = row.at("converged").get<bool>();
                p.certificate = VertexFunction::Zero(g.vertex_count());
                for (const auto& entry : row.at("certificate"))
                    p.certificate[g.index_of(entry.at("id").get<std::string>())] =
                        entry.at("u").get<double>();
                e.per_radius.push_back(std::move(p));
            }
        out.push_back(std::move(e));
    }
    return out;
}

void write_check_summary_json(const std::vector<CheckReport>& reports, const std::string& path) {
    auto s = summarize(reports);
    json j;
    j["version"] = kVersion;
    j["total"] = s.total;
    j["passed"] = s.passed;
    j["failed"] = s.failed;
    j["skipped"] = s.skipped;
    j["vacuous_passes"] = s.vacuous;
    j["min_margin"] = s.min_margin;
    j["worst_instance"] = s.worst_instance;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_bound_summary_json(const std::vector<BoundReport>& reports, const std::string& path) {
    auto s = summarize_bounds(reports);
    json j;
    j["version"] = kVersion;
    j["total"] = s.total;
    j["passed"] = s.passed;
    j["vacuous_passes"] = s.vacuous;
    j["min_log_margin"] = s.min_log_margin;
    j["worst"] = {{"x", s.worst_x}, {"y", s.worst_y}, {"t", s.worst_t}};
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_margin_svg(const std::vector<BoundReport>& reports, const WeightedGraph& g,
                      const std::string& path) {
    const double width = 860, height = 560, pad = 60;
    double t_lo = 1e300, t_hi = -1e300, m_lo = 1e300, m_hi = -1e300;
    std::map<std::pair<int, int>, std::vector<const BoundReport*>> series;
    for (const auto& r : reports) {
        if (!std::isfinite(r.log_margin)) continue;
        t_lo = std::min(t_lo, r.t);
        t_hi = std::max(t_hi, r.t);
        m_lo = std::min(m_lo, r.log_margin);
        m_hi = std::max(m_hi, r.log_margin);
        series[{r.x, r.y}].push_back(&r);
    }
    if (series.empty()) {
        auto out = open_out(path);
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\"/>\n";
        return;
    }
    if (t_hi == t_lo) t_hi = t_lo + 1.0;
    if (m_hi == m_lo) m_hi = m_lo + 1.0;
    auto sx = [&](double t) {
        return pad + (std::log(t) - std::log(t_lo)) / (std::log(t_hi) - std::log(t_lo)) *
                         (width - 2 * pad);
    };
    auto sy = [&](double m) { return height - pad - (m - m_lo) / (m_hi - m_lo) * (height - 2 * pad); };

    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << pad << "\" y1=\"" << height - pad << "\" x2=\"" << width - pad
        << "\" y2=\"" << height - pad << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\""
        << height - pad << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        double t = std::exp(std::log(t_lo) + (std::log(t_hi) - std::log(t_lo)) * i / 5.0);
        double m = m_lo + (m_hi - m_lo) * i / 5.0;
        out << "<line x1=\"" << sx(t) << "\" y1=\"" << height - pad << "\" x2=\"" << sx(t)
            << "\" y2=\"" << height - pad + 6 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << sx(t) << "\" y=\"" << height - pad + 20
            << "\" font-size=\"11\" text-anchor=\"middle\">" << format_double(t) << "</text>\n";
        out << "<line x1=\"" << pad - 6 << "\" y1=\"" << sy(m) << "\" x2=\"" << pad << "\" y2=\""
            << sy(m) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << pad - 10 << "\" y=\"" << sy(m) + 4
            << "\" font-size=\"11\" text-anchor=\"end\">" << format_double(m) << "</text>\n";
    }
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
        << "\" font-size=\"12\" text-anchor=\"middle\">t (log scale)</text>\n";
    out << "<text x=\"16\" y=\"" << height / 2
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << height / 2
        << ")\">log margin</text>\n";

    int color_index = 0;
    const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    for (auto& [pair, rows] : series) {
        std::sort(rows.begin(), rows.end(),
                  [](const BoundReport* a, const BoundReport* b) { return a->t < b->t; });
        out << "<polyline fill=\"none\" stroke=\"" << colors[color_index % 10]
            << "\" stroke-width=\"1.2\" points=\"";
        for (const auto* r : rows) out << sx(r->t) << ',' << sy(r->log_margin) << ' ';
        out << "\"><title>" << csv_escape(g.id_of(pair.first)) << " - "
            << csv_escape(g.id_of(pair.second)) << "</title></polyline>\n";
        ++color_index;
    }
    out << "</svg>\n";
}

}  // namespace hklab
