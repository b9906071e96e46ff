#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "dlab/error.hpp"
#include "dlab/harness.hpp"

namespace dlab {

namespace {

enum class Ty { number, integer, boolean, string, choice, number_list, complex, object, object_list, coef_field, time_list };

struct Field {
    std::string key;
    Ty ty;
    bool required = false;
    Json def = nullptr;
    std::vector<std::string> choices = {};
    std::vector<Field> sub = {};
};

Field req(std::string key, Ty ty) { return {std::move(key), ty, true}; }
Field opt(std::string key, Ty ty, Json def = nullptr) { return {std::move(key), ty, false, std::move(def)}; }
Field choice(std::string key, std::vector<std::string> c, Json def = nullptr) {
    Field f{std::move(key), Ty::choice, def.is_null(), def};
    f.choices = std::move(c);
    return f;
}
// `filled`: absent sections are echoed with their defaults
Field object(std::string key, std::vector<Field> sub, bool required = false, bool filled = false) {
    Field f{std::move(key), Ty::object, required};
    f.sub = std::move(sub);
    if (filled) f.def = Json::object();
    return f;
}
Field object_list(std::string key, std::vector<Field> sub, bool required = true) {
    Field f{std::move(key), Ty::object_list, required};
    f.sub = std::move(sub);
    return f;
}

int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

[[noreturn]] void schema_error(const YAML::Node& at, const std::string& path, const std::string& what) {
    std::string where = at.Mark().is_null() ? std::string("") : "line " + std::to_string(line_of(at)) + ": ";
    fail(ErrorKind::SchemaError, where + "field '" + path + "': " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double as_number(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) schema_error(n, path, "expected a number");
    try {
        const double v = n.as<double>();
        if (!std::isfinite(v)) schema_error(n, path, "expected a finite number");
        return v;
    } catch (const YAML::Exception&) {
        schema_error(n, path, "expected a number, got '" + n.Scalar() + "'");
    }
}

Json convert(const YAML::Node& n, const Field& f, const std::string& path);

Json convert_map(const YAML::Node& n, const std::vector<Field>& schema, const std::string& path) {
    if (!n.IsMap()) schema_error(n, path.empty() ? "<root>" : path, "expected a mapping");
    for (const auto& kv : n) {
        const std::string key = kv.first.as<std::string>();
        bool known = false;
        for (const auto& f : schema) known = known || f.key == key;
        if (!known) schema_error(kv.first, join(path, key), "unknown field");
    }
    Json out = Json::object();
    for (const auto& f : schema) {
        const YAML::Node v = n[f.key];
        if (v) {
            out[f.key] = convert(v, f, join(path, f.key));
        } else if (f.required) {
            schema_error(n, join(path, f.key), "missing required field");
        } else if (f.ty == Ty::object && f.def.is_object()) {
            out[f.key] = convert_map(YAML::Node(YAML::NodeType::Map), f.sub, join(path, f.key));
        } else if (!f.def.is_null()) {
            out[f.key] = f.def;
        }
    }
    return out;
}

Json convert_complex(const YAML::Node& n, const std::string& path) {
    if (n.IsScalar()) return Json::array({as_number(n, path), 0.0});
    if (n.IsSequence() && n.size() == 2) return Json::array({as_number(n[0], path), as_number(n[1], path)});
    schema_error(n, path, "expected a number or [re, im]");
}

Json convert_coef_field(const YAML::Node& n, const std::string& path) {
    if (!n.IsMap()) schema_error(n, path, "expected a coefficient field mapping");
    const YAML::Node k = n["kind"];
    if (!k) schema_error(n, join(path, "kind"), "missing required field");
    const std::string kind = k.as<std::string>();
    std::vector<Field> schema{req("kind", Ty::string)};
    if (kind == "constant") {
        schema.push_back(req("value", Ty::complex));
    } else if (kind == "linear") {
        schema.push_back(req("slope", Ty::complex));
        schema.push_back(opt("offset", Ty::complex, Json::array({0.0, 0.0})));
    } else if (kind == "power") {
        schema.push_back(req("coeff", Ty::complex));
        schema.push_back(req("power", Ty::integer));
    } else if (kind == "bump") {
        // either the amplitude or the real line integral ∫ Re b
        if (static_cast<bool>(n["amplitude"]) == static_cast<bool>(n["integral"]))
            schema_error(n, join(path, "amplitude"), "give exactly one of 'amplitude' or 'integral'");
        schema.push_back(opt("amplitude", Ty::complex));
        schema.push_back(opt("integral", Ty::number));
        schema.push_back(req("center", Ty::number));
        schema.push_back(req("radius", Ty::number));
    } else if (kind == "sum") {
        Field terms{"terms", Ty::object_list, true};
        schema.push_back(terms);
    } else {
        schema_error(k, join(path, "kind"), "unknown coefficient kind '" + kind + "'");
    }
    if (kind != "sum") return convert_map(n, schema, path);
    // sum: validate each term recursively
    for (const auto& kv : n) {
        const std::string key = kv.first.as<std::string>();
        if (key != "kind" && key != "terms") schema_error(kv.first, join(path, key), "unknown field");
    }
    const YAML::Node terms = n["terms"];
    if (!terms) schema_error(n, join(path, "terms"), "missing required field");
    if (!terms.IsSequence() || terms.size() == 0) schema_error(terms, join(path, "terms"), "expected a nonempty list");
    Json out{{"kind", "sum"}, {"terms", Json::array()}};
    for (std::size_t i = 0; i < terms.size(); ++i)
        out["terms"].push_back(convert_coef_field(terms[i], join(path, "terms") + "[" + std::to_string(i) + "]"));
    return out;
}

Json convert(const YAML::Node& n, const Field& f, const std::string& path) {
    switch (f.ty) {
    case Ty::number:
        return as_number(n, path);
    case Ty::integer: {
        const double v = as_number(n, path);
        if (v != std::floor(v) || std::abs(v) > 1e15) schema_error(n, path, "expected an integer");
        return static_cast<long long>(v);
    }
    case Ty::boolean:
        try {
            if (n.IsScalar()) return n.as<bool>();
        } catch (const YAML::Exception&) {
        }
        schema_error(n, path, "expected true or false");
    case Ty::string:
        if (!n.IsScalar()) schema_error(n, path, "expected a string");
        return n.Scalar();
    case Ty::choice: {
        if (!n.IsScalar()) schema_error(n, path, "expected a string");
        const std::string s = n.Scalar();
        for (const auto& c : f.choices)
            if (c == s) return s;
        std::string allowed;
        for (const auto& c : f.choices) allowed += (allowed.empty() ? "" : ", ") + c;
        schema_error(n, path, "'" + s + "' is not one of: " + allowed);
    }
    case Ty::number_list: {
        if (!n.IsSequence() || n.size() == 0) schema_error(n, path, "expected a nonempty list of numbers");
        Json out = Json::array();
        for (std::size_t i = 0; i < n.size(); ++i) out.push_back(as_number(n[i], path + "[" + std::to_string(i) + "]"));
        return out;
    }
    case Ty::complex:
        return convert_complex(n, path);
    case Ty::object:
        return convert_map(n, f.sub, path);
    case Ty::object_list: {
        if (!n.IsSequence() || n.size() == 0) schema_error(n, path, "expected a nonempty list");
        Json out = Json::array();
        for (std::size_t i = 0; i < n.size(); ++i)
            out.push_back(convert_map(n[i], f.sub, path + "[" + std::to_string(i) + "]"));
        return out;
    }
    case Ty::coef_field:
        return convert_coef_field(n, path);
    case Ty::time_list: {
        if (!n.IsSequence() || n.size() == 0) schema_error(n, path, "expected a nonempty list of times");
        Json out = Json::array();
        for (std::size_t i = 0; i < n.size(); ++i) {
            const std::string p = path + "[" + std::to_string(i) + "]";
            if (n[i].IsScalar()) {
                out.push_back(Json{{"scale", as_number(n[i], p)}, {"power", 0.0}});
            } else {
                out.push_back(convert_map(n[i], {req("scale", Ty::number), opt("power", Ty::number, 0.0)}, p));
            }
        }
        return out;
    }
    }
    schema_error(n, path, "unsupported field type");
}

// --- schemas -----------------------------------------------------------------

std::vector<Field> common() {
    return {req("experiment", Ty::string), opt("seed", Ty::integer, 0), opt("description", Ty::string)};
}

Field model_section() {
    return object("model", {opt("alpha1", Ty::number), opt("beta1", Ty::number), opt("mu1", Ty::complex),
                            opt("m", Ty::integer)});
}

Field background_section() {
    return object("background", {choice("kind", {"ds_linear", "kdv_cubic", "sampled"}), opt("x1", Ty::number),
                                 opt("beta0", Ty::number), opt("x_cut", Ty::number), opt("glue", Ty::number),
                                 opt("A", Ty::number), opt("file", Ty::string)});
}

Field tolerances(std::vector<std::pair<std::string, double>> defaults) {
    std::vector<Field> sub;
    for (auto& [k, v] : defaults) sub.push_back(opt(k, Ty::number, v));
    return object("tolerances", std::move(sub), false, true);
}

std::vector<Field> packet_common() {
    return {choice("packet", {"model", "schrodinger", "kdv"}),
            req("lambda", Ty::number_list),
            model_section(),
            background_section(),
            object("profile", {opt("x1", Ty::number), opt("lo", Ty::number), opt("hi", Ty::number)}),
            opt("nodes_per_wavelength", Ty::integer, 24),
            object("options",
                   {opt("correction", Ty::boolean, true), opt("wkb_sign", Ty::integer, -1),
                    opt("sine", Ty::boolean, false)},
                   false, true)};
}

std::vector<Field> evolve_common() {
    return {req("lambda", Ty::number_list),
            object("profile", {opt("x1", Ty::number, std::exp(-1.0)), opt("lo", Ty::number)}, false, true),
            opt("points_per_wavelength", Ty::integer, 32),
            opt("dt_phase", Ty::number, 0.02),
            opt("t_end_scale", Ty::number, 2.0),
            opt("samples", Ty::integer, 41),
            opt("margin", Ty::number, 2.0),
            opt("reach", Ty::number, 6.0),
            opt("snapshots", Ty::boolean, false)};
}

std::vector<Field> schema_for(const std::string& e) {
    std::vector<Field> s = common();
    auto add = [&](std::vector<Field> more) {
        for (auto& f : more) s.push_back(std::move(f));
    };
    if (e == "bichar") {
        add({object_list("cases", {opt("A", Ty::number, 1.0), req("n", Ty::number), req("m", Ty::integer),
                                   req("X0", Ty::number), req("Xi0", Ty::number)}),
             opt("rel_tol", Ty::number, 1e-10), opt("horizon", Ty::number, 2.0),
             opt("trajectory_csv", Ty::boolean, true),
             tolerances({{"closed_form_rel", 1e-6}, {"invariant_drift", 1e-9}})});
    } else if (e == "exponents") {
        add({object_list("schrodinger",
                         {req("alpha1", Ty::number), req("beta1", Ty::number), opt("expect_sigma_c", Ty::number),
                          opt("expect_s_c", Ty::integer)},
                         false),
             object_list("kdv", {req("alpha1", Ty::number), opt("expect_sigma_c", Ty::number),
                                 opt("expect_s_c", Ty::integer)},
                         false)});
    } else if (e == "tm-check") {
        add({choice("mode", {"coefficients", "degenerate_family", "rays"}),
             object("coefficients", {req("a", Ty::coef_field), req("b", Ty::coef_field), req("lo", Ty::number),
                                     req("hi", Ty::number),
                                     choice("kind", {"schrodinger", "schrodinger_signed", "kdv"}, "schrodinger"),
                                     opt("degenerate", Ty::boolean, false), opt("nodes", Ty::integer, 2001),
                                     opt("threshold", Ty::number, 1e3), opt("expect_bounded", Ty::boolean)}),
             opt("coefficients_file", Ty::string),
             object("family", {choice("equation", {"schrodinger", "kdv"}, "schrodinger"), opt("alpha1", Ty::number),
                               opt("beta1", Ty::number),
                               opt("sigma_offsets", Ty::number_list, Json::array({-1.0, 0.0, 1.0})),
                               opt("eps_list", Ty::number_list, Json::array({1e-2, 1e-4, 1e-6, 1e-8})),
                               opt("nodes_per_decade", Ty::integer, 400)}),
             object("rays", {opt("dim", Ty::integer, 2), choice("field", {"zero", "constant", "bump"}, "bump"),
                             opt("amplitude", Ty::number_list), opt("center", Ty::number_list),
                             opt("radius", Ty::number, 1.0), opt("half_width", Ty::number, 2.0),
                             opt("points_per_dim", Ty::integer, 9), opt("directions", Ty::integer, 8),
                             opt("T", Ty::number, 2.0), opt("random_rays", Ty::integer, 0),
                             opt("threshold", Ty::number, 1e3), opt("expect_bounded", Ty::boolean)}),
             tolerances({{"slope_rel", 0.1}})});
    } else if (e == "tm-packet") {
        add({req("lambda", Ty::number), req("mu_list", Ty::number_list), req("b", Ty::coef_field),
             opt("x0", Ty::number, 0.0), opt("t", Ty::number, 0.0),
             choice("mode", {"direct", "conjugated"}, "conjugated"), opt("nodes_per_wavelength", Ty::integer, 24),
             opt("norm_times", Ty::number_list, Json::array({0.0})),
             tolerances({{"slope_lo", 1.6}, {"slope_hi", 2.4}, {"unit_norm", 1e-8}})});
    } else if (e == "wp-build") {
        add(packet_common());
        add({opt("times", Ty::time_list, Json::array({Json{{"scale", 0.0}, {"power", 0.0}}})),
             opt("compare_model", Ty::boolean, false), opt("regularity", Ty::boolean, true),
             opt("snapshots", Ty::boolean, false),
             tolerances({{"equality", 1e-10}, {"ratio", 3.0}, {"envelope_slack", 1.05}})});
    } else if (e == "wp-residual") {
        add(packet_common());
        add({req("times", Ty::time_list), opt("ablation", Ty::boolean, false),
             tolerances({{"ratio", 3.0}, {"ablation_slope", 1.0}, {"ablation_tol", 0.2}})});
    } else if (e == "degenerate") {
        add(packet_common());
        add({req("gamma_prime", Ty::number), opt("p", Ty::number, 2.0), opt("s", Ty::integer, 0),
             object("window", {req("scale", Ty::number), opt("power", Ty::number, -1.0)}, true),
             opt("samples", Ty::integer, 11), tolerances({{"rel", 0.1}, {"abs_fraction", 0.15}})});
    } else if (e == "kdv-suite") {
        add(packet_common());
        add({object_list("degeneration",
                         {opt("gamma_prime", Ty::number, 0.0), opt("p", Ty::number, 2.0), opt("s", Ty::integer, 0)},
                         false),
             object("window", {opt("scale", Ty::number, 1.0 / 3.0), opt("power", Ty::number, -2.0)}, false, true),
             opt("samples", Ty::integer, 9),
             tolerances({{"ratio", 3.0}, {"rel", 0.15}, {"abs_fraction", 0.15}, {"envelope_slack", 1.05},
                         {"beta", 1e-10}})});
    } else if (e == "inflate") {
        add(evolve_common());
        add({tolerances({{"rate_fraction", 0.8}, {"lower_bound_agreement", 0.25}, {"drift_slack", 1.05},
                         {"scaling", 0.2}})});
    } else if (e == "hm-rates") {
        add(evolve_common());
        s.erase(std::find_if(s.begin(), s.end(), [](const Field& f) { return f.key == "t_end_scale"; }));
        add({opt("t_end_scale", Ty::number, 1.0), opt("m_list", Ty::number_list, Json::array({0.0, 1.0})),
             tolerances({{"rate_rel", 0.25}})});
    } else if (e == "tm-lowerbound") {
        add({req("lambda", Ty::number_list), req("mu", Ty::number), opt("x0", Ty::number, 0.0),
             req("t_f", Ty::number), opt("nodes_per_wavelength", Ty::integer, 32), opt("dt_phase", Ty::number, 0.02),
             opt("samples", Ty::integer, 33), opt("safety", Ty::number, 0.45), opt("half_width", Ty::number, 1.5),
             choice("boundary", {"periodic", "dirichlet"}, "periodic"),
             object_list("cases", {req("name", Ty::string), req("b", Ty::coef_field),
                                   choice("expect", {"lower_bound", "unit_band"}, "lower_bound")}),
             tolerances({{"band_lo", 0.9}, {"band_hi", 1.1}})});
    }
    return s;
}

void apply_override(YAML::Node root, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorKind::SchemaError, "override '" + spec + "' is not key=value");
    const std::string path = spec.substr(0, eq);
    YAML::Node value = YAML::Load(spec.substr(eq + 1));
    std::vector<std::string> keys;
    std::stringstream ss(path);
    for (std::string k; std::getline(ss, k, '.');) keys.push_back(k);
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        YAML::Node next = chain.back()[keys[i]];
        if (!next || !next.IsMap()) {
            chain.back()[keys[i]] = YAML::Node(YAML::NodeType::Map);
            next = chain.back()[keys[i]];
        }
        chain.push_back(next);
    }
    chain.back()[keys.back()] = value;
}

void semantic_checks(const Json& v, const YAML::Node& root) {
    const std::string e = v["experiment"];
    auto bad = [&](const std::string& field, const std::string& what) {
        YAML::Node at = root;
        if (root[field]) at = root[field];
        schema_error(at, field, what);
    };
    if (v.contains("packet")) {
        const std::string pk = v["packet"];
        for (const auto& l : v["lambda"]) {
            const double lam = l.get<double>();
            if (pk == "kdv" && (lam < 1.0 || lam != std::floor(lam))) bad("lambda", "KdV packets need integer λ >= 1");
            if (pk == "schrodinger" && lam > -1.0) bad("lambda", "Schrödinger packets need λ <= -1");
            if (pk == "model" && lam >= 0.0) bad("lambda", "model packets need λ < 0");
        }
        if (pk != "model" && !v.contains("background")) bad("background", "missing required field for this packet");
    }
    if (e == "inflate" || e == "hm-rates")
        for (const auto& l : v["lambda"])
            if (l.get<double>() >= 0.0) bad("lambda", "model evolution needs λ < 0");
    if (e == "tm-check") {
        const std::string mode = v["mode"];
        if (mode == "coefficients" && !v.contains("coefficients"))
            bad("coefficients", "mode 'coefficients' needs coefficients or coefficients_file");
    }
    if (e == "exponents" && !v.contains("schrodinger") && !v.contains("kdv"))
        bad("schrodinger", "give at least one of 'schrodinger' or 'kdv'");
}

} // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"bichar",     "exponents", "tm-check", "tm-packet",
                                                "wp-build",   "wp-residual", "degenerate", "inflate",
                                                "hm-rates",   "tm-lowerbound", "kdv-suite"};
    return names;
}

ExperimentConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir,
                                   const std::vector<std::string>& overrides) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& ex) {
        fail(ErrorKind::SchemaError, "line " + std::to_string(ex.mark.line + 1) + ": " + ex.msg);
    }
    if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) schema_error(root, "<root>", "expected a mapping");
    for (const auto& o : overrides) apply_override(root, o);
    const YAML::Node e = root["experiment"];
    if (!e) schema_error(root, "experiment", "missing required field");
    const std::string name = e.IsScalar() ? e.Scalar() : "";
    bool known = false;
    for (const auto& n : experiment_names()) known = known || n == name;
    if (!known) schema_error(e, "experiment", "unknown experiment '" + name + "'");

    ExperimentConfig cfg;
    cfg.experiment = name;
    cfg.base_dir = base_dir;
    cfg.values = convert_map(root, schema_for(name), "");

    if (name == "tm-check" && cfg.values.contains("coefficients_file")) {
        const auto path = base_dir / cfg.values["coefficients_file"].get<std::string>();
        if (!std::filesystem::exists(path))
            schema_error(root["coefficients_file"], "coefficients_file", "file not found: " + path.string());
        YAML::Node file;
        try {
            file = YAML::LoadFile(path.string());
        } catch (const YAML::ParserException& ex) {
            fail(ErrorKind::SchemaError,
                 path.string() + " line " + std::to_string(ex.mark.line + 1) + ": " + ex.msg);
        }
        std::vector<Field> schema;
        for (const auto& f : schema_for("tm-check"))
            if (f.key == "coefficients") schema = f.sub;
        Json loaded = convert_map(file, schema, "coefficients_file");
        if (cfg.values.contains("coefficients") && cfg.values["coefficients"] != loaded)
            schema_error(root["coefficients"], "coefficients", "inline coefficients disagree with coefficients_file");
        cfg.values["coefficients"] = loaded;
    }
    if (cfg.values.contains("background") && cfg.values["background"].contains("file")) {
        const auto path = base_dir / cfg.values["background"]["file"].get<std::string>();
        if (!std::filesystem::exists(path))
            schema_error(root["background"]["file"], "background.file", "file not found: " + path.string());
    }
    semantic_checks(cfg.values, root);
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::SchemaError, "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.parent_path().empty() ? "." : path.parent_path(), overrides);
}

} // namespace dlab
