#include "common.hpp"

#include <fstream>
#include <sstream>

#include "dlab/error.hpp"

namespace dlab::harness {

cplx complex_of(const Json& j) {
    if (j.is_number()) return j.get<double>();
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

Json json_of(cplx z) { return Json::array({z.real(), z.imag()}); }

Field1D field_from_json(const Json& j) {
    const std::string kind = j.at("kind");
    if (kind == "constant") return constant_field(complex_of(j.at("value")));
    if (kind == "linear") return linear_field(complex_of(j.at("slope")), complex_of(j.value("offset", Json(0.0))));
    if (kind == "power") return power_field(complex_of(j.at("coeff")), j.at("power").get<int>());
    if (kind == "bump") {
        const double r = j.at("radius");
        const cplx amp = j.contains("integral") ? cplx(j["integral"].get<double>() / bump_integral(r)) :
                                                  complex_of(j.at("amplitude"));
        return bump_field(amp, j.at("center").get<double>(), r);
    }
    if (kind == "sum") {
        Field1D acc = constant_field(0.0);
        for (const auto& t : j.at("terms")) acc = sum_fields(acc, field_from_json(t));
        return acc;
    }
    fail(ErrorKind::SchemaError, "unknown coefficient kind '" + kind + "'");
}

SchrodingerSpec schrodinger_spec(const Json& v) {
    SchrodingerSpec s;
    if (!v.contains("model")) return s;
    const Json& m = v["model"];
    if (m.contains("alpha1")) s.alpha1 = m["alpha1"];
    if (m.contains("beta1")) s.beta1 = m["beta1"];
    if (m.contains("mu1")) s.mu1 = complex_of(m["mu1"]);
    return s;
}

KdvSpec kdv_spec(const Json& v) {
    KdvSpec s;
    if (!v.contains("model")) return s;
    const Json& m = v["model"];
    if (m.contains("alpha1")) s.alpha1 = m["alpha1"];
    if (m.contains("mu1")) s.mu1 = complex_of(m["mu1"]).real();
    if (m.contains("m")) s.m = m["m"];
    return s;
}

namespace {

// columns x, re, im with an optional header line
Json load_sampled(const std::filesystem::path& path, Json desc) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::SchemaError, "cannot open background file " + path.string());
    Json xs = Json::array(), re = Json::array(), im = Json::array();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        for (char& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream ss(line);
        double a, b, c = 0.0;
        if (!(ss >> a)) continue; // header
        if (!(ss >> b)) fail(ErrorKind::SchemaError, path.string() + ": expected columns x, re[, im]");
        ss >> c;
        xs.push_back(a);
        re.push_back(b);
        im.push_back(c);
    }
    desc.erase("file");
    desc["x"] = xs;
    desc["re"] = re;
    desc["im"] = im;
    return desc;
}

} // namespace

BackgroundPtr background_of(const ExperimentConfig& cfg, const SchrodingerSpec* s, const KdvSpec* k) {
    Json desc = cfg.values.at("background");
    if (desc.contains("file")) desc = load_sampled(cfg.base_dir / desc["file"].get<std::string>(), desc);
    return background_from_json(desc, s, k);
}

BumpProfile profile_of(const Json& v, double x1) {
    const Json p = v.value("profile", Json::object());
    const double px1 = p.value("x1", x1);
    return BumpProfile::normalized(p.value("lo", 0.5 * px1), p.value("hi", px1));
}

PacketOptions packet_options(const Json& v) {
    PacketOptions o;
    const Json& j = v.at("options");
    o.correction = j.at("correction");
    o.wkb_sign = j.at("wkb_sign");
    o.sine = j.at("sine");
    return o;
}

PacketSetup packet_setup(const ExperimentConfig& cfg, double lambda, PacketOptions opt) {
    const Json& v = cfg.values;
    const std::string kind = v.at("packet");
    PacketSetup s;
    if (kind == "model") {
        s.g0 = profile_of(v, std::exp(-1.0));
        const YProfile a0 = model_profile_from_g0(s.g0);
        s.h2 = a0.sobolev(2);
        s.sigma_c = -0.5;
        s.packet = model_packet_schrodinger(lambda, a0, opt);
    } else if (kind == "schrodinger") {
        s.sspec = schrodinger_spec(v);
        s.bg = background_of(cfg, &s.sspec, nullptr);
        s.g0 = profile_of(v, s.bg->x1());
        s.h2 = s.g0.sobolev(2, s.bg->x1());
        s.sigma_c = s.sspec.sigma_c();
        s.packet = packet_schrodinger(s.bg, s.sspec, lambda, s.g0, opt);
    } else {
        s.kspec = kdv_spec(v);
        s.bg = background_of(cfg, nullptr, &s.kspec);
        s.g0 = profile_of(v, s.bg->x1());
        s.h2 = s.g0.sobolev(2, s.bg->x1());
        s.h3 = s.g0.sobolev(3, s.bg->x1());
        s.sigma_c = s.kspec.sigma_c();
        s.packet = packet_kdv(s.bg, s.kspec, lambda, s.g0, opt);
    }
    return s;
}

double time_of(const Json& te, double lambda) {
    const double scale = te.at("scale"), power = te.at("power");
    return scale == 0.0 ? 0.0 : scale * std::pow(std::abs(lambda), power);
}

double max_min_ratio(const std::vector<double>& v) {
    double lo = v.at(0), hi = v.at(0);
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return hi / lo;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, "slope fit needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (sxy - sx * sy / n) / (sxx - sx * sx / n);
}

std::string fmt_lambda(double lambda) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", lambda);
    std::string s = buf;
    for (char& ch : s)
        if (ch == '-') ch = 'm';
    return s;
}

Table snapshot_table(const std::string& name, const GridField& f) {
    const Grid1D& g = *f.grid;
    const bool y = g.kind == Coord::y;
    Table t{name, {}, {}};
    if (y) t.columns.push_back("y");
    t.columns.insert(t.columns.end(), {"x", "re", "im"});
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::vector<double> row;
        if (y) row.push_back(g.nodes[i]);
        row.insert(row.end(), {g.x[i], f.values[i].real(), f.values[i].imag()});
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace dlab::harness
