#include "affinekit/scenario.hpp"

#include "affinekit/errors.hpp"
#include "affinekit/qdesk.hpp"
#include "affinekit/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

namespace affinekit {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& msg) {
    throw Error(ErrorCode::ValidationError, key + ": " + msg);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string item(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
    require_object(obj, path);
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(join(path, key), "unknown key");
    }
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const std::string& path, const char* key) {
    const json* v = find(obj, key);
    if (v == nullptr) fail(join(path, key), "missing");
    return *v;
}

double as_number(const json& v, const std::string& key) {
    if (!v.is_number()) fail(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "not finite");
    return d;
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
    const json* v = find(obj, key);
    return v == nullptr ? fallback : as_number(*v, join(path, key));
}

int int_or(const json& obj, const std::string& path, const char* key, int fallback) {
    const json* v = find(obj, key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) fail(join(path, key), "expected an integer");
    return v->get<int>();
}

std::string string_of(const json& v, const std::string& key) {
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
}

Eigen::MatrixXd as_matrix(const json& v, const std::string& key, int rows, int cols) {
    if (!v.is_array() || static_cast<int>(v.size()) != rows) fail(key, "expected " + std::to_string(rows) + " rows");
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const json& row = v[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != cols) {
            fail(item(key, static_cast<std::size_t>(i)), "expected " + std::to_string(cols) + " columns");
        }
        for (int j = 0; j < cols; ++j) m(i, j) = as_number(row[static_cast<std::size_t>(j)], item(item(key, i), j));
    }
    return m;
}

Vec as_vec(const json& v, const std::string& key, int n) {
    if (!v.is_array() || static_cast<int>(v.size()) != n) fail(key, "expected " + std::to_string(n) + " entries");
    Vec out(n);
    for (int i = 0; i < n; ++i) out(i) = as_number(v[static_cast<std::size_t>(i)], item(key, static_cast<std::size_t>(i)));
    return out;
}

std::vector<double> as_list(const json& v, const std::string& key) {
    if (!v.is_array()) fail(key, "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], item(key, i)));
    return out;
}

template <class M>
json matrix_json(const M& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json vec_json(const Vec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

// --- sections ---------------------------------------------------------------

InertiaParams parse_inertia(const json& j, const std::string& path, int n) {
    check_keys(j, path, {"M", "J", "I", "A", "B", "H", "Lten", "Rten"});
    InertiaParams p;
    p.M = number_or(j, path, "M", 1.0);
    p.I = number_or(j, path, "I", 0.0);
    p.A = number_or(j, path, "A", 0.0);
    p.B = number_or(j, path, "B", 0.0);
    if (const json* v = find(j, "J")) p.J = Mat(as_matrix(*v, join(path, "J"), n, n));
    if (const json* v = find(j, "H")) p.H = Mat(as_matrix(*v, join(path, "H"), n, n));
    if (const json* v = find(j, "Lten")) p.Lten = as_matrix(*v, join(path, "Lten"), n * n, n * n);
    if (const json* v = find(j, "Rten")) p.Rten = as_matrix(*v, join(path, "Rten"), n * n, n * n);
    return p;
}

json inertia_json(const InertiaParams& p) {
    json j = {{"M", p.M}, {"I", p.I}, {"A", p.A}, {"B", p.B}};
    if (p.J) j["J"] = matrix_json(*p.J);
    if (p.H) j["H"] = matrix_json(*p.H);
    if (p.Lten) j["Lten"] = matrix_json(*p.Lten);
    if (p.Rten) j["Rten"] = matrix_json(*p.Rten);
    return j;
}

Shape parse_shape_of(const json& j, const std::string& path) {
    const std::string key = string_of(require(j, path, "shape"), join(path, "shape"));
    const auto kind = parse_shape(key);
    if (!kind) fail(join(path, "shape"), "unknown shape '" + key + "'");
    return {*kind, as_list(require(j, path, "coeffs"), join(path, "coeffs"))};
}

PotentialSpec parse_potential(const json& j, const std::string& path, int n) {
    check_keys(j, path, {"one_body", "binary", "dilatation"});
    PotentialSpec spec;
    if (const json* ob = find(j, "one_body")) {
        const std::string p = join(path, "one_body");
        if (!ob->is_array()) fail(p, "expected an array");
        for (std::size_t i = 0; i < ob->size(); ++i) {
            const json& t = (*ob)[i];
            const std::string ip = item(p, i);
            check_keys(t, ip, {"shape", "coeffs", "arg", "index", "center"});
            OneBodyTerm term;
            term.shape = parse_shape_of(t, ip);
            const std::string arg = string_of(require(t, ip, "arg"), join(ip, "arg"));
            const auto a = parse_one_body_arg(arg);
            if (!a) fail(join(ip, "arg"), "unknown argument '" + arg + "'");
            term.arg = *a;
            term.index = int_or(t, ip, "index", 0);
            if (const json* c = find(t, "center")) term.center = as_vec(*c, join(ip, "center"), n);
            spec.one_body.push_back(term);
        }
    }
    if (const json* bin = find(j, "binary")) {
        const std::string p = join(path, "binary");
        if (!bin->is_array()) fail(p, "expected an array");
        for (std::size_t i = 0; i < bin->size(); ++i) {
            const json& t = (*bin)[i];
            const std::string ip = item(p, i);
            check_keys(t, ip, {"shape", "coeffs", "arg", "index"});
            BinaryTerm term;
            term.shape = parse_shape_of(t, ip);
            const std::string arg = string_of(require(t, ip, "arg"), join(ip, "arg"));
            const auto a = parse_binary_arg(arg);
            if (!a) fail(join(ip, "arg"), "unknown argument '" + arg + "'");
            term.arg = *a;
            term.index = int_or(t, ip, "index", 0);
            spec.binary.push_back(term);
        }
    }
    if (const json* dil = find(j, "dilatation")) {
        const std::string p = join(path, "dilatation");
        check_keys(*dil, p, {"kappa", "d_ref"});
        spec.dilatation = Dilatation{as_number(require(*dil, p, "kappa"), join(p, "kappa")), number_or(*dil, p, "d_ref", 1.0)};
    }
    try {
        validate(spec, n);
    } catch (const Error& e) {
        throw Error(ErrorCode::ValidationError, e.what());
    }
    return spec;
}

json potential_json(const PotentialSpec& spec) {
    json j = json::object();
    json ob = json::array();
    for (const auto& t : spec.one_body) {
        json e = {{"shape", to_string(t.shape.kind)}, {"coeffs", t.shape.coeffs}, {"arg", to_string(t.arg)}, {"index", t.index}};
        if (t.center.size() != 0) e["center"] = vec_json(t.center);
        ob.push_back(e);
    }
    json bin = json::array();
    for (const auto& t : spec.binary) {
        bin.push_back({{"shape", to_string(t.shape.kind)}, {"coeffs", t.shape.coeffs}, {"arg", to_string(t.arg)}, {"index", t.index}});
    }
    j["one_body"] = ob;
    j["binary"] = bin;
    if (spec.dilatation) j["dilatation"] = {{"kappa", spec.dilatation->kappa}, {"d_ref", spec.dilatation->d_ref}};
    return j;
}

InitialSpec parse_initial(const json& j, const std::string& path, int n, int N) {
    check_keys(j, path, {"bodies", "generate"});
    InitialSpec init;
    const json* bodies = find(j, "bodies");
    const json* gen = find(j, "generate");
    if ((bodies == nullptr) == (gen == nullptr)) fail(path, "give exactly one of 'bodies' or 'generate'");
    if (gen != nullptr) {
        const std::string p = join(path, "generate");
        check_keys(*gen, p, {"position_spread", "phi_spread", "velocity_scale"});
        GenerateSpec g;
        g.position_spread = number_or(*gen, p, "position_spread", g.position_spread);
        g.phi_spread = number_or(*gen, p, "phi_spread", g.phi_spread);
        g.velocity_scale = number_or(*gen, p, "velocity_scale", g.velocity_scale);
        if (!(g.phi_spread >= 0.0 && g.phi_spread < 0.9)) fail(join(p, "phi_spread"), "must lie in [0, 0.9)");
        init.generate = g;
        return init;
    }
    const std::string p = join(path, "bodies");
    if (!bodies->is_array()) fail(p, "expected an array");
    if (static_cast<int>(bodies->size()) != N) fail(p, "expected N = " + std::to_string(N) + " bodies");
    for (std::size_t k = 0; k < bodies->size(); ++k) {
        const json& b = (*bodies)[k];
        const std::string bp = item(p, k);
        check_keys(b, bp, {"x", "phi", "p", "pi", "v", "xi"});
        InitialBody body;
        body.x = as_vec(require(b, bp, "x"), join(bp, "x"), n);
        body.phi = Mat(as_matrix(require(b, bp, "phi"), join(bp, "phi"), n, n));
        if (!(body.phi.determinant() > kSingularDet)) fail(join(bp, "phi"), "det phi must be positive");
        if (const json* v = find(b, "p")) body.p = as_vec(*v, join(bp, "p"), n);
        if (const json* v = find(b, "pi")) body.pi = Mat(as_matrix(*v, join(bp, "pi"), n, n));
        if (const json* v = find(b, "v")) body.v = as_vec(*v, join(bp, "v"), n);
        if (const json* v = find(b, "xi")) body.xi = Mat(as_matrix(*v, join(bp, "xi"), n, n));
        const bool momenta = body.p || body.pi;
        const bool velocities = body.v || body.xi;
        if (momenta && velocities) fail(bp, "mixes momenta (p, pi) with velocities (v, xi)");
        init.bodies.push_back(body);
    }
    return init;
}

json initial_json(const InitialSpec& init) {
    if (init.generate) {
        return {{"generate",
                 {{"position_spread", init.generate->position_spread},
                  {"phi_spread", init.generate->phi_spread},
                  {"velocity_scale", init.generate->velocity_scale}}}};
    }
    json bodies = json::array();
    for (const auto& b : init.bodies) {
        json e = {{"x", vec_json(b.x)}, {"phi", matrix_json(b.phi)}};
        if (b.p) e["p"] = vec_json(*b.p);
        if (b.pi) e["pi"] = matrix_json(*b.pi);
        if (b.v) e["v"] = vec_json(*b.v);
        if (b.xi) e["xi"] = matrix_json(*b.xi);
        bodies.push_back(e);
    }
    return {{"bodies", bodies}};
}

SpectrumSpec parse_spectrum(const json& j, const std::string& path) {
    check_keys(j, path, {"alpha", "hbar", "potential", "qmin", "qmax", "points", "levels"});
    SpectrumSpec s;
    s.alpha = number_or(j, path, "alpha", s.alpha);
    s.hbar = number_or(j, path, "hbar", s.hbar);
    if (const json* v = find(j, "potential")) s.potential = string_of(*v, join(path, "potential"));
    s.qmin = number_or(j, path, "qmin", s.qmin);
    s.qmax = number_or(j, path, "qmax", s.qmax);
    s.points = int_or(j, path, "points", s.points);
    s.levels = int_or(j, path, "levels", s.levels);
    if (!(s.alpha > 0.0)) fail(join(path, "alpha"), "must be positive");
    if (!(s.hbar > 0.0)) fail(join(path, "hbar"), "must be positive");
    if (!(s.qmin < s.qmax)) fail(join(path, "qmax"), "must exceed qmin");
    if (s.points < 16) fail(join(path, "points"), "must be at least 16");
    if (s.levels < 1 || s.levels > s.points - 2) fail(join(path, "levels"), "out of range");
    try {
        parse_q_potential(s.potential);
    } catch (const Error& e) {
        fail(join(path, "potential"), e.what());
    }
    return s;
}

json spectrum_json(const SpectrumSpec& s) {
    return {{"alpha", s.alpha}, {"hbar", s.hbar},     {"potential", s.potential}, {"qmin", s.qmin},
            {"qmax", s.qmax},   {"points", s.points}, {"levels", s.levels}};
}

std::size_t line_of(const std::string& text, std::size_t byte, std::size_t* column) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    *column = col;
    return line;
}

}  // namespace

bool InitialBody::operator==(const InitialBody& o) const {
    auto vec_eq = [](const std::optional<Vec>& a, const std::optional<Vec>& b) {
        return a.has_value() == b.has_value() && (!a || (a->size() == b->size() && *a == *b));
    };
    auto mat_eq = [](const std::optional<Mat>& a, const std::optional<Mat>& b) {
        return a.has_value() == b.has_value() && (!a || (a->rows() == b->rows() && *a == *b));
    };
    return x.size() == o.x.size() && x == o.x && phi.rows() == o.phi.rows() && phi == o.phi && vec_eq(p, o.p) &&
           mat_eq(pi, o.pi) && vec_eq(v, o.v) && mat_eq(xi, o.xi);
}

bool Scenario::operator==(const Scenario& o) const {
    const auto& a = integrator;
    const auto& b = o.integrator;
    return schema_version == o.schema_version && name == o.name && mode == o.mode && n == o.n && N == o.N &&
           seed == o.seed && kinetic == o.kinetic && inertia == o.inertia && potential == o.potential &&
           initial == o.initial && a.method == b.method && a.dt == b.dt && a.T == b.T &&
           a.record_every == b.record_every && output_dir == o.output_dir && spectrum == o.spectrum;
}

Scenario parse_scenario_text(const std::string& text, const std::string& source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t col = 0;
        const std::size_t line = line_of(text, e.byte == 0 ? 0 : e.byte - 1, &col);
        throw Error(ErrorCode::ParseError,
                    source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
    }
    check_keys(root, "",
               {"schema_version", "name", "mode", "n", "N", "seed", "kinetic", "inertia", "heterogeneous", "potential",
                "initial", "integrator", "output", "spectrum"});
    Scenario s;
    s.schema_version = int_or(root, "", "schema_version", -1);
    if (s.schema_version != kSchemaVersion) {
        fail("schema_version", "expected " + std::to_string(kSchemaVersion));
    }
    if (const json* v = find(root, "name")) s.name = string_of(*v, "name");
    if (const json* v = find(root, "mode")) {
        const std::string mode = string_of(*v, "mode");
        if (mode == "dynamics") {
            s.mode = ScenarioMode::Dynamics;
        } else if (mode == "spectrum") {
            s.mode = ScenarioMode::Spectrum;
        } else {
            fail("mode", "expected 'dynamics' or 'spectrum'");
        }
    }
    if (const json* v = find(root, "seed")) {
        if (!v->is_number_unsigned()) fail("seed", "expected a non-negative integer");
        s.seed = v->get<std::uint64_t>();
    }
    if (const json* v = find(root, "output")) {
        check_keys(*v, "output", {"dir"});
        if (const json* d = find(*v, "dir")) s.output_dir = string_of(*d, "output.dir");
    }

    if (s.mode == ScenarioMode::Spectrum) {
        s.spectrum = parse_spectrum(require(root, "", "spectrum"), "spectrum");
        for (const char* key : {"kinetic", "inertia", "potential", "initial", "integrator", "heterogeneous"})
            if (find(root, key) != nullptr) fail(key, "not used in spectrum mode");
        s.n = int_or(root, "", "n", 1);
        s.N = int_or(root, "", "N", 1);
        if (s.n != 1) fail("n", "spectrum mode is n = 1");
        return s;
    }
    if (find(root, "spectrum") != nullptr) fail("spectrum", "only used in spectrum mode");

    if (find(root, "n") == nullptr) fail("n", "missing");
    s.n = int_or(root, "", "n", 0);
    if (s.n < 1 || s.n > kMaxDim) fail("n", "must lie in 1..4");
    s.N = int_or(root, "", "N", 1);
    if (s.N < 1) fail("N", "must be at least 1");

    const json& kin = require(root, "", "kinetic");
    check_keys(kin, "kinetic", {"translational", "internal"});
    if (const json* v = find(kin, "translational")) {
        const std::string key = string_of(*v, "kinetic.translational");
        const auto m = parse_translational(key);
        if (!m) fail("kinetic.translational", "unknown model '" + key + "'");
        s.kinetic.translational = *m;
    }
    {
        const std::string key = string_of(require(kin, "kinetic", "internal"), "kinetic.internal");
        const auto m = parse_internal(key);
        if (!m) fail("kinetic.internal", "unknown model '" + key + "'");
        s.kinetic.internal = *m;
    }

    bool heterogeneous = false;
    if (const json* v = find(root, "heterogeneous")) {
        if (!v->is_boolean()) fail("heterogeneous", "expected true or false");
        heterogeneous = v->get<bool>();
    }
    const json& inertia = require(root, "", "inertia");
    if (heterogeneous) {
        if (!inertia.is_array() || static_cast<int>(inertia.size()) != s.N) {
            fail("inertia", "heterogeneous inertia needs an array of N entries");
        }
        std::vector<InertiaParams> per_body;
        for (std::size_t k = 0; k < inertia.size(); ++k) per_body.push_back(parse_inertia(inertia[k], item("inertia", k), s.n));
        s.inertia = InertiaTable::heterogeneous(std::move(per_body));
    } else {
        s.inertia = InertiaTable(parse_inertia(inertia, "inertia", s.n));
    }
    for (int k = 0; k < (heterogeneous ? s.N : 1); ++k) {
        try {
            validate_params(s.kinetic, s.inertia[static_cast<std::size_t>(k)], s.n);
        } catch (const Error& e) {
            fail(heterogeneous ? item("inertia", static_cast<std::size_t>(k)) : "inertia", e.what());
        }
    }

    if (const json* v = find(root, "potential")) s.potential = parse_potential(*v, "potential", s.n);
    s.initial = parse_initial(require(root, "", "initial"), "initial", s.n, s.N);

    if (const json* v = find(root, "integrator")) {
        check_keys(*v, "integrator", {"method", "dt", "T", "record_every"});
        if (const json* m = find(*v, "method")) {
            const std::string key = string_of(*m, "integrator.method");
            const auto method = parse_method(key);
            if (!method) fail("integrator.method", "unknown method '" + key + "'");
            s.integrator.method = *method;
        }
        s.integrator.dt = number_or(*v, "integrator", "dt", s.integrator.dt);
        s.integrator.T = number_or(*v, "integrator", "T", 1.0);
        s.integrator.record_every = int_or(*v, "integrator", "record_every", 1);
    } else {
        s.integrator.T = 1.0;
    }
    if (!(s.integrator.dt > 0.0)) fail("integrator.dt", "must be positive");
    if (!(s.integrator.T >= 0.0)) fail("integrator.T", "must be non-negative");
    if (s.integrator.record_every < 1) fail("integrator.record_every", "must be at least 1");
    return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, path.string() + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str(), path.string());
}

std::string serialize(const Scenario& s) {
    json root;
    root["schema_version"] = s.schema_version;
    root["name"] = s.name;
    root["seed"] = s.seed;
    root["output"] = {{"dir", s.output_dir}};
    root["n"] = s.n;
    root["N"] = s.N;
    if (s.mode == ScenarioMode::Spectrum) {
        root["mode"] = "spectrum";
        root["spectrum"] = spectrum_json(s.spectrum);
        return root.dump(2) + "\n";
    }
    root["mode"] = "dynamics";
    root["kinetic"] = {{"translational", to_string(s.kinetic.translational)}, {"internal", to_string(s.kinetic.internal)}};
    root["heterogeneous"] = s.inertia.is_heterogeneous();
    if (s.inertia.is_heterogeneous()) {
        json arr = json::array();
        for (const auto& p : s.inertia.entries()) arr.push_back(inertia_json(p));
        root["inertia"] = arr;
    } else {
        root["inertia"] = inertia_json(s.inertia[0]);
    }
    root["potential"] = potential_json(s.potential);
    root["initial"] = initial_json(s.initial);
    root["integrator"] = {{"method", to_string(s.integrator.method)},
                          {"dt", s.integrator.dt},
                          {"T", s.integrator.T},
                          {"record_every", s.integrator.record_every}};
    return root.dump(2) + "\n";
}

Hamiltonian hamiltonian_of(const Scenario& s) { return {s.kinetic, s.inertia, s.potential}; }

PhaseState initial_state(const Scenario& s) {
    PhaseState st;
    st.config.n = s.n;
    const std::size_t count = static_cast<std::size_t>(s.N);
    st.mom.p.resize(count);
    st.mom.pi.resize(count);
    if (s.initial.generate) {
        const GenerateSpec& g = *s.initial.generate;
        CounterRng rng(s.seed, 1);
        for (std::size_t k = 0; k < count; ++k) {
            BodyConfig b;
            b.x = random_vector(rng, s.n, -g.position_spread, g.position_spread);
            do {
                b.phi = Mat::Identity(s.n, s.n) + random_matrix(rng, s.n, -g.phi_spread, g.phi_spread);
            } while (!(b.phi.determinant() > 0.1));
            st.config.bodies.push_back(b);
        }
        VelocityState vel;
        for (std::size_t k = 0; k < count; ++k) {
            vel.v.push_back(random_vector(rng, s.n, -g.velocity_scale, g.velocity_scale));
            vel.xi.push_back(random_matrix(rng, s.n, -g.velocity_scale, g.velocity_scale));
        }
        st.mom = legendre(s.kinetic, s.inertia, st.config, vel);
        return st;
    }
    for (std::size_t k = 0; k < count; ++k) {
        const InitialBody& b = s.initial.bodies[k];
        st.config.bodies.push_back({b.x, b.phi});
    }
    for (std::size_t k = 0; k < count; ++k) {
        const InitialBody& b = s.initial.bodies[k];
        if (b.v || b.xi) {
            SystemConfig one{s.n, {st.config.bodies[k]}};
            VelocityState vel{{b.v.value_or(Vec::Zero(s.n))}, {b.xi.value_or(Mat::Zero(s.n, s.n))}};
            const MomentumState m = legendre(s.kinetic, InertiaTable(s.inertia[k]), one, vel);
            st.mom.p[k] = m.p.front();
            st.mom.pi[k] = m.pi.front();
        } else {
            st.mom.p[k] = b.p.value_or(Vec::Zero(s.n));
            st.mom.pi[k] = b.pi.value_or(Mat::Zero(s.n, s.n));
        }
    }
    return st;
}

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

namespace {

void append_row(std::string& out, const std::vector<double>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i != 0) out += ',';
        out += format_number(row[i]);
    }
    out += '\n';
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + p.string());
    out << content;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string trajectory_csv(const Trajectory& t, int n, std::size_t count) {
    std::string out = "t";
    for (std::size_t k = 1; k <= count; ++k) {
        const std::string K = std::to_string(k);
        for (int i = 0; i < n; ++i) out += ",x" + K + "[" + std::to_string(i) + "]";
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out += ",phi" + K + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
        for (int i = 0; i < n; ++i) out += ",p" + K + "[" + std::to_string(i) + "]";
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out += ",pi" + K + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
    }
    out += ",E";
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) out += ",Sigma[" + std::to_string(a) + "][" + std::to_string(b) + "]_total";
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) out += ",SigmaHat[" + std::to_string(a) + "][" + std::to_string(b) + "]_total";
    for (std::size_t k = 1; k <= count; ++k) out += ",detphi" + std::to_string(k);
    out += '\n';

    std::vector<double> row;
    for (std::size_t s = 0; s < t.states.size(); ++s) {
        const PhaseState& st = t.states[s];
        const ChargeRecord& c = t.charges[s];
        row.clear();
        row.push_back(t.times[s]);
        for (std::size_t k = 0; k < count; ++k) {
            const auto& b = st.config.bodies[k];
            for (int i = 0; i < n; ++i) row.push_back(b.x(i));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) row.push_back(b.phi(i, j));
            for (int i = 0; i < n; ++i) row.push_back(st.mom.p[k](i));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) row.push_back(st.mom.pi[k](i, j));
        }
        row.push_back(c.energy);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) row.push_back(c.Sigma(a, b));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) row.push_back(c.SigmaHat(a, b));
        for (double d : c.det_phi) row.push_back(d);
        append_row(out, row);
    }
    return out;
}

std::string charges_csv(const Trajectory& t, int n, std::size_t count) {
    std::string out = "t,E";
    for (int a = 0; a < n; ++a) out += ",p[" + std::to_string(a) + "]_total";
    for (const char* name : {"Sigma", "SigmaHat", "J", "S", "V"}) {
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) out += std::string(",") + name + "[" + std::to_string(a) + "][" + std::to_string(b) + "]_total";
    }
    for (std::size_t k = 1; k <= count; ++k) {
        out += ",detphi" + std::to_string(k);
        for (int a = 0; a < n; ++a) out += ",q" + std::to_string(k) + "[" + std::to_string(a) + "]";
    }
    out += '\n';
    std::vector<double> row;
    for (std::size_t s = 0; s < t.charges.size(); ++s) {
        const ChargeRecord& c = t.charges[s];
        row.clear();
        row.push_back(t.times[s]);
        row.push_back(c.energy);
        for (int a = 0; a < n; ++a) row.push_back(c.p(a));
        for (const Mat* m : {&c.Sigma, &c.SigmaHat, &c.J, &c.S, &c.V})
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) row.push_back((*m)(a, b));
        for (std::size_t k = 0; k < count; ++k) {
            row.push_back(c.det_phi[k]);
            for (int a = 0; a < n; ++a) row.push_back(c.q[k](a));
        }
        append_row(out, row);
    }
    return out;
}

int sign_changes(const std::vector<double>& series) {
    int changes = 0;
    int last = 0;
    for (std::size_t i = 1; i < series.size(); ++i) {
        const double d = series[i] - series[i - 1];
        const int sgn = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
        if (sgn == 0) continue;
        if (last != 0 && sgn != last) ++changes;
        last = sgn;
    }
    return changes;
}

json charges_json(const ChargeRecord& c) {
    json q = json::array();
    for (const Vec& v : c.q) q.push_back(vec_json(v));
    return {{"energy", c.energy},
            {"p", vec_json(c.p)},
            {"Sigma", matrix_json(c.Sigma)},
            {"SigmaHat", matrix_json(c.SigmaHat)},
            {"J", matrix_json(c.J)},
            {"S", matrix_json(c.S)},
            {"V", matrix_json(c.V)},
            {"det_phi", c.det_phi},
            {"q", q}};
}

RunResult run_dynamics(const Scenario& s, const std::filesystem::path& dir) {
    RunResult r;
    r.dir = dir;
    const Hamiltonian h = hamiltonian_of(s);
    const PhaseState s0 = initial_state(s);
    Trajectory traj = integrate(h, s0, s.integrator);
    const std::size_t count = static_cast<std::size_t>(s.N);
    const std::string tcsv = trajectory_csv(traj, s.n, count);
    const std::string ccsv = charges_csv(traj, s.n, count);
    r.hash = hex64(fnv1a(ccsv, fnv1a(tcsv)));
    r.drift = charge_drift(traj);

    json summary;
    summary["name"] = s.name;
    summary["schema_version"] = s.schema_version;
    summary["mode"] = "dynamics";
    summary["n"] = s.n;
    summary["N"] = s.N;
    summary["seed"] = s.seed;
    summary["kinetic"] = {{"translational", to_string(s.kinetic.translational)}, {"internal", to_string(s.kinetic.internal)}};
    summary["method"] = to_string(s.integrator.method);
    summary["dt"] = s.integrator.dt;
    summary["T"] = s.integrator.T;
    summary["status"] = traj.status == RunStatus::Completed ? "completed" : "state_invalid";
    summary["partial"] = traj.status != RunStatus::Completed;
    summary["steps"] = traj.steps;
    summary["samples"] = traj.times.size();
    summary["final_time"] = traj.times.back();
    summary["max_iterations_used"] = traj.max_iterations_used;
    summary["initial_charges"] = charges_json(traj.charges.front());
    summary["final_charges"] = charges_json(traj.charges.back());
    summary["drift"] = {{"energy", r.drift.energy}, {"p", r.drift.p},   {"Sigma", r.drift.Sigma}, {"SigmaHat", r.drift.SigmaHat},
                        {"J", r.drift.J},           {"S", r.drift.S},   {"V", r.drift.V}};

    json volumes = json::array();
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<double> ln_det;
        for (const ChargeRecord& c : traj.charges) ln_det.push_back(std::log(c.det_phi[k]));
        const auto [lo, hi] = std::minmax_element(ln_det.begin(), ln_det.end());
        volumes.push_back({{"body", k + 1}, {"ln_det_phi_min", *lo}, {"ln_det_phi_max", *hi},
                           {"ln_det_phi_derivative_sign_changes", sign_changes(ln_det)}});
    }
    summary["volumes"] = volumes;
    json relative = json::array();
    for (std::size_t k = 0; k < count; ++k) {
        for (std::size_t l = k + 1; l < count; ++l) {
            double lo = INFINITY, hi = -INFINITY;
            for (const ChargeRecord& c : traj.charges) {
                const double g = c.det_phi[l] / c.det_phi[k];
                lo = std::min(lo, g);
                hi = std::max(hi, g);
            }
            relative.push_back({{"pair", {k + 1, l + 1}}, {"det_Gamma_min", lo}, {"det_Gamma_max", hi}});
        }
    }
    summary["relative_volumes"] = relative;
    summary["determinism_hash"] = r.hash;

    write_file(dir / "trajectory.csv", tcsv);
    write_file(dir / "charges.csv", ccsv);
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    r.exit_code = traj.status == RunStatus::Completed ? 0 : 2;
    r.trajectory = std::move(traj);
    return r;
}

}  // namespace

SpectrumResult compute_spectrum(const SpectrumSpec& spec) {
    QGrid g{spec.qmin, spec.qmax, spec.points, spec.hbar, spec.alpha};
    validate(g);
    const auto V = parse_q_potential(spec.potential);
    const TridiagonalOperator op = build_hamiltonian_1d(g, V);
    const Spectrum sp = solve_spectrum(g, op, spec.levels);

    SpectrumResult r;
    r.levels = sp.energies;
    r.sigma_haar = hermiticity_check(g, QOperator::Sigma, QMeasure::Haar);
    r.sigma_lebesgue = hermiticity_check(g, QOperator::Sigma, QMeasure::Lebesgue);
    r.sigma_corrected_lebesgue = hermiticity_check(g, QOperator::SigmaCorrected, QMeasure::Lebesgue);
    r.momentum_p = hermiticity_check(g, QOperator::MomentumP, QMeasure::Lebesgue);
    const GaussianPacket packet{0.5 * (g.q_min + g.q_max), std::min(1.0, 0.05 * (g.q_max - g.q_min)), 0.0};
    const double z = std::min(0.3, 0.1 * (g.q_max - g.q_min));
    r.shift = shift_action_check(z, packet, g);
    r.shift_series = shift_series_check(z, packet, g);

    json levels = json::array();
    for (Eigen::Index i = 0; i < sp.energies.size(); ++i) levels.push_back(sp.energies(i));
    json out;
    out["levels"] = levels;
    out["defects"] = {{"Sigma_haar", r.sigma_haar},
                      {"Sigma_lebesgue", r.sigma_lebesgue},
                      {"Sigma_corrected_lebesgue", r.sigma_corrected_lebesgue},
                      {"momentum_p", r.momentum_p},
                      {"shift", r.shift},
                      {"shift_series", r.shift_series}};
    out["grid"] = {{"qmin", g.q_min}, {"qmax", g.q_max}, {"points", g.m}, {"h", g.h()}};
    out["alpha"] = spec.alpha;
    out["hbar"] = spec.hbar;
    out["potential"] = spec.potential;
    r.json = out.dump(2) + "\n";

    std::string csv = "q";
    for (int k = 0; k < spec.levels; ++k) csv += ",rho" + std::to_string(k);
    csv += '\n';
    std::vector<Eigen::VectorXd> rho;
    for (int k = 0; k < spec.levels; ++k) rho.push_back(invariant_distribution(from_eigenvector(g, sp, k)));
    std::vector<double> row;
    for (int j = 0; j < g.m; ++j) {
        row.clear();
        row.push_back(g.q(j));
        for (const auto& r_k : rho) row.push_back(r_k(j));
        append_row(csv, row);
    }
    r.csv = std::move(csv);
    return r;
}

RunResult run(const Scenario& s, const std::filesystem::path& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    std::filesystem::create_directories(out_dir);
    RunResult r;
    if (s.mode == ScenarioMode::Spectrum) {
        const SpectrumResult sp = compute_spectrum(s.spectrum);
        write_file(out_dir / "spectrum.json", sp.json);
        write_file(out_dir / "rho.csv", sp.csv);
        r.dir = out_dir;
        r.hash = hex64(fnv1a(sp.csv, fnv1a(sp.json)));
    } else {
        r = run_dynamics(s, out_dir);
    }
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace affinekit
