#include "curvot/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "curvot/errors.hpp"

#include "json.hpp"

namespace curvot::io {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw IoError("invalid JSON in " + path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed for " + path);
}

bool parse_double(std::string_view tok, double& out) {
    const char* b = tok.data();
    const char* e = b + tok.size();
    while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(e[-1]))) --e;
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc{} && p == e && b < e;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string lower_trim(std::string_view s) {
    std::string t;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c)))
            t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return t;
}

int pgm_next_int(const std::string& data, std::size_t& pos, const std::string& path) {
    while (pos < data.size()) {
        const char c = data[pos];
        if (c == '#') {
            while (pos < data.size() && data[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
        } else {
            break;
        }
    }
    int v = 0;
    bool any = false;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) {
        v = v * 10 + (data[pos] - '0');
        ++pos;
        any = true;
    }
    if (!any) throw IoError("malformed PGM header in " + path);
    return v;
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
    const std::string data = read_file(path);
    if (data.size() < 2 || data[0] != 'P' || (data[1] != '2' && data[1] != '5'))
        throw IoError(path + ": not a P2/P5 PGM file");
    const bool binary = data[1] == '5';
    std::size_t pos = 2;

    GrayImage img;
    img.width = pgm_next_int(data, pos, path);
    img.height = pgm_next_int(data, pos, path);
    const int maxval = pgm_next_int(data, pos, path);
    img.maxval = maxval;
    if (img.width < 1 || img.height < 1 || maxval < 1 || maxval > 65535)
        throw IoError(path + ": bad PGM dimensions");

    const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
    img.pixels.resize(count);
    if (binary) {
        ++pos;  // single whitespace after maxval
        const int bytes = maxval > 255 ? 2 : 1;
        if (data.size() - pos < count * bytes) throw IoError(path + ": truncated PGM data");
        for (std::size_t i = 0; i < count; ++i) {
            if (bytes == 1) {
                img.pixels[i] = static_cast<unsigned char>(data[pos + i]);
            } else {
                const auto hi = static_cast<unsigned char>(data[pos + 2 * i]);
                const auto lo = static_cast<unsigned char>(data[pos + 2 * i + 1]);
                img.pixels[i] = hi * 256 + lo;
            }
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) img.pixels[i] = pgm_next_int(data, pos, path);
    }
    return img;
}

AtomicMeasure<2> image_to_diracs(const GrayImage& img, IntensityMode mode, double threshold) {
    AtomicMeasure<2> mu;
    const double cutoff = threshold * img.maxval;
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            const double v = img.at(r, c);
            const double w = mode == IntensityMode::bright ? v : img.maxval - v;
            if (w <= cutoff) continue;
            mu.positions.push_back({{(c + 0.5) / img.width, 1.0 - (r + 0.5) / img.height}});
            mu.masses.push_back(w);
        }
    }
    if (mu.positions.empty()) throw ZeroTotalMass("image_to_diracs: every pixel was dropped");
    return normalize(mu);
}

template <int D>
AtomicMeasure<D> load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    AtomicMeasure<D> mu;
    std::string line;
    int lineno = 0;
    // column k of each row maps to coords[k] (0..D-1), mass (D) or is skipped
    std::vector<int> layout;
    bool have_layout = false;
    bool has_mass = false;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv(line);

        if (!have_layout) {
            double probe;
            if (!parse_double(fields[0], probe)) {  // header row
                layout.assign(fields.size(), -1);
                const char* names[3] = {"x", "y", "z"};
                for (std::size_t k = 0; k < fields.size(); ++k) {
                    const std::string name = lower_trim(fields[k]);
                    for (int c = 0; c < D; ++c)
                        if (name == names[c]) layout[k] = c;
                    if (name == "mass" || name == "m" || name == "weight") {
                        layout[k] = D;
                        has_mass = true;
                    }
                }
                for (int c = 0; c < D; ++c)
                    if (std::find(layout.begin(), layout.end(), c) == layout.end())
                        throw ParseError("missing coordinate column '" +
                                             std::string(names[c]) + "'",
                                         lineno);
                have_layout = true;
                continue;
            }
            // headerless: D coordinates, optional trailing mass column
            if (fields.size() != D && fields.size() != D + 1)
                throw ParseError("expected " + std::to_string(D) + " or " +
                                     std::to_string(D + 1) + " columns",
                                 lineno);
            layout.resize(fields.size());
            for (std::size_t k = 0; k < fields.size(); ++k) layout[k] = static_cast<int>(k);
            has_mass = fields.size() == D + 1;
            have_layout = true;
        }

        if (fields.size() != layout.size())
            throw ParseError("inconsistent column count", lineno);
        Vec<D> pos;
        double mass = 1.0;
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (layout[k] < 0) continue;
            double v;
            if (!parse_double(fields[k], v)) throw ParseError("bad number", lineno);
            if (layout[k] == D)
                mass = v;
            else
                pos[layout[k]] = v;
        }
        mu.positions.push_back(pos);
        mu.masses.push_back(has_mass ? mass : 1.0);
    }
    if (mu.positions.empty()) throw ParseError("no data rows", lineno);
    return normalize(mu);
}

template <int D>
PolylineMeasure<D> read_polyline_json(const std::string& path) {
    const json j = load_json(path);
    PolylineMeasure<D> nu;
    if (!j.contains("vertices")) throw IoError(path + ": missing 'vertices'");
    for (const auto& v : j["vertices"]) {
        if (v.size() != D) throw IoError(path + ": vertex dimension mismatch");
        Vec<D> p;
        for (int c = 0; c < D; ++c) p[c] = v[c].get<double>();
        nu.vertices.push_back(p);
    }
    nu.disjoint_mode = j.value("disjoint_mode", false);
    if (j.contains("densities")) {
        nu.densities = j["densities"].get<std::vector<double>>();
        if (nu.densities.size() + 1 != nu.vertices.size())
            throw IoError(path + ": expected one density per segment");
    } else {
        nu.densities = density_from_lengths(nu.vertices, nu.disjoint_mode);
    }
    return nu;
}

template <int D>
void write_polyline_json(const PolylineMeasure<D>& nu, const std::string& path) {
    json j;
    j["vertices"] = json::array();
    for (const auto& v : nu.vertices) {
        json row = json::array();
        for (int c = 0; c < D; ++c) row.push_back(v[c]);
        j["vertices"].push_back(row);
    }
    j["densities"] = nu.densities;
    j["disjoint_mode"] = nu.disjoint_mode;
    write_text(path, j.dump(2) + "\n");
}

void render_svg(const PolylineMeasure<2>& nu, const AtomicMeasure<2>* mu,
                const std::string& path, const SvgStyle& style) {
    std::vector<Vec2> pts = nu.vertices;
    if (mu)
        pts.insert(pts.end(), mu->positions.begin(), mu->positions.end());
    Box<2> box = bounding_box(pts);
    const double extent = std::max(box.max_extent(), 1e-12);
    const double s = (style.size - 2.0 * style.margin) / extent;
    const double w = (box.hi[0] - box.lo[0]) * s + 2.0 * style.margin;
    const double h = (box.hi[1] - box.lo[1]) * s + 2.0 * style.margin;

    auto fmt = [&](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", v);
        return std::string(buf);
    };
    auto tx = [&](const Vec2& p) { return style.margin + (p[0] - box.lo[0]) * s; };
    auto ty = [&](const Vec2& p) { return style.margin + (box.hi[1] - p[1]) * s; };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\""
        << fmt(h) << "\" viewBox=\"0 0 " << fmt(w) << " " << fmt(h) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    if (mu) {
        double max_mass = 0.0;
        for (double m : mu->masses) max_mass = std::max(max_mass, m);
        out << "<g fill=\"#c89632\" fill-opacity=\"0.7\">\n";
        for (int i = 0; i < mu->size(); ++i) {
            const double r = style.point_scale * (max_mass > 0.0 ? mu->masses[i] / max_mass : 0.0);
            if (r <= 0.0) continue;
            out << "<circle cx=\"" << fmt(tx(mu->positions[i])) << "\" cy=\""
                << fmt(ty(mu->positions[i])) << "\" r=\"" << fmt(r) << "\"/>\n";
        }
        out << "</g>\n";
    }

    // one path per chain: zero-density segments break the pen
    out << "<g fill=\"none\" stroke=\"black\" stroke-width=\"" << fmt(style.stroke_width)
        << "\" stroke-linecap=\"round\" stroke-linejoin=\"round\">\n";
    bool open = false;
    std::ostringstream d;
    for (int a = 0; a < nu.segment_count(); ++a) {
        if (nu.densities[a] <= 0.0) {
            if (open) {
                out << "<path d=\"" << d.str() << "\"/>\n";
                d.str("");
                open = false;
            }
            continue;
        }
        if (!open) {
            d << "M " << fmt(tx(nu.vertices[a])) << " " << fmt(ty(nu.vertices[a]));
            open = true;
        }
        d << " L " << fmt(tx(nu.vertices[a + 1])) << " " << fmt(ty(nu.vertices[a + 1]));
    }
    if (open) out << "<path d=\"" << d.str() << "\"/>\n";
    out << "</g>\n</svg>\n";
    write_text(path, out.str());
}

void write_history_csv(const ConvergenceHistory& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    history.write_csv(out);
}

void write_shape_history_csv(const std::vector<ShapeIterationRecord>& history,
                             const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "iteration,cost,grad_inf,inner_iterations\n";
    out.precision(17);
    for (const auto& r : history)
        out << r.iteration << ',' << r.cost << ',' << r.grad_inf << ',' << r.inner_iterations
            << '\n';
}

void write_potential_json(const DualPotential& phi, const std::string& path) {
    json j;
    j["phi"] = phi;
    write_text(path, j.dump() + "\n");
}

DualPotential read_potential_json(const std::string& path) {
    const json j = load_json(path);
    if (!j.contains("phi")) throw IoError(path + ": missing 'phi'");
    return j["phi"].get<DualPotential>();
}

template AtomicMeasure<2> load_catalog<2>(const std::string&);
template AtomicMeasure<3> load_catalog<3>(const std::string&);
template PolylineMeasure<2> read_polyline_json<2>(const std::string&);
template PolylineMeasure<3> read_polyline_json<3>(const std::string&);
template void write_polyline_json<2>(const PolylineMeasure<2>&, const std::string&);
template void write_polyline_json<3>(const PolylineMeasure<3>&, const std::string&);

}  // namespace curvot::io
