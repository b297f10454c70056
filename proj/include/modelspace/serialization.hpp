#pragma once

// JSON forms of MapExpr and InnerFunction. Complex numbers are [re, im]
// pairs (a bare number is accepted as a real value). Parse errors carry the
// JSON pointer of the offending node.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "modelspace/errors.hpp"
#include "modelspace/inner_function.hpp"
#include "modelspace/map_expr.hpp"
#include "modelspace/types.hpp"

namespace modelspace::json {

using Json = nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::InvalidConfig, (path.empty() ? std::string("/") : path) + ": " + what);
}

inline Json toJson(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complexFrom(const Json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) fail(path, "expected [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline const Json& member(const Json& j, const char* key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path + "/" + key, "missing");
    return *it;
}

inline double numberFrom(const Json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

inline int intFrom(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

inline Poly polyFrom(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty coefficient list");
    Poly p;
    for (std::size_t i = 0; i < j.size(); ++i) p.push_back(complexFrom(j[i], path + "/" + std::to_string(i)));
    return p;
}

inline Json toJson(const Poly& p) {
    Json a = Json::array();
    for (auto c : p) a.push_back(toJson(c));
    return a;
}

// ---- inner functions ----

inline Json toJson(const InnerFunction& f) {
    Json j = Json::object();
    if (f.family) {
        Json params = {{"count", f.family->count}};
        if (f.family->name == "sparse-tangential") {
            params["t_ratio"] = f.family->tRatio;
            params["alpha_ratio"] = f.family->alphaRatio;
        } else {
            params["q"] = f.family->q;
        }
        j["family"] = {{"name", f.family->name}, {"params", params}};
    } else {
        Json zs = Json::array();
        for (const auto& z : f.zeros) zs.push_back(toJson(z.point));
        j["zeros"] = zs;
        if (f.tailSum > 0.0) j["tail_sum"] = f.tailSum;
        if (!f.limitPoints.empty()) {
            Json lp = Json::array();
            for (auto p : f.limitPoints) lp.push_back(toJson(p));
            j["limit_points"] = lp;
        }
    }
    Json atoms = Json::array();
    for (const auto& a : f.atoms) atoms.push_back({{"xi", toJson(a.xi)}, {"omega", a.omega}});
    j["atoms"] = atoms;
    return j;
}

inline InnerFunction innerFrom(const Json& j, const std::string& path = "") {
    if (!j.is_object()) fail(path, "expected an inner-function object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "zeros" && it.key() != "atoms" && it.key() != "family" && it.key() != "tail_sum" &&
            it.key() != "limit_points")
            fail(path + "/" + it.key(), "unknown key");
    InnerFunction f;
    try {
        if (j.contains("family")) {
            if (j.contains("zeros")) fail(path + "/zeros", "zeros and family are exclusive");
            const std::string fp = path + "/family";
            const Json& fam = j["family"];
            const Json& nameJ = member(fam, "name", fp);
            if (!nameJ.is_string()) fail(fp + "/name", "expected a string");
            const std::string name = nameJ.get<std::string>();
            const Json params = fam.contains("params") ? fam["params"] : Json::object();
            const std::string pp = fp + "/params";
            auto param = [&](const char* key, double dflt) {
                return params.contains(key) ? numberFrom(params[key], pp + "/" + key) : dflt;
            };
            const int count = intFrom(member(params, "count", pp), pp + "/count");
            if (name == "sparse-tangential")
                f = inner::sparseTangential(count, param("t_ratio", 0.5), param("alpha_ratio", 0.5));
            else if (name == "radial")
                f = inner::radial(count, param("q", 0.5));
            else
                fail(fp + "/name", "unknown family '" + name + "'");
        } else if (j.contains("zeros")) {
            const Json& zs = j["zeros"];
            if (!zs.is_array()) fail(path + "/zeros", "expected a list");
            std::vector<Complex> pts;
            for (std::size_t i = 0; i < zs.size(); ++i) pts.push_back(complexFrom(zs[i], path + "/zeros/" + std::to_string(i)));
            f = inner::fromZeros(pts);
            if (j.contains("tail_sum")) f.tailSum = numberFrom(j["tail_sum"], path + "/tail_sum");
        }
        if (j.contains("limit_points")) {
            const Json& lp = j["limit_points"];
            if (!lp.is_array()) fail(path + "/limit_points", "expected a list");
            f.limitPoints.clear();
            for (std::size_t i = 0; i < lp.size(); ++i)
                f.limitPoints.push_back(complexFrom(lp[i], path + "/limit_points/" + std::to_string(i)));
        }
        if (j.contains("atoms")) {
            const Json& as = j["atoms"];
            if (!as.is_array()) fail(path + "/atoms", "expected a list");
            std::vector<SingularAtom> atoms;
            for (std::size_t i = 0; i < as.size(); ++i) {
                const std::string ap = path + "/atoms/" + std::to_string(i);
                atoms.push_back({complexFrom(member(as[i], "xi", ap), ap + "/xi"), numberFrom(member(as[i], "omega", ap), ap + "/omega")});
            }
            const InnerFunction s = inner::singular(atoms);
            f.atoms = s.atoms;
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidConfig) throw;
        fail(path, e.what());
    }
    if (f.zeros.empty() && f.atoms.empty()) fail(path, "inner function needs zeros, a family or atoms");
    return f;
}

// ---- maps ----

inline Json toJson(const MapExpr& m) {
    using K = MapExpr::Kind;
    switch (m.kind()) {
        case K::Identity: return {{"kind", "identity"}};
        case K::Scale: return {{"kind", "scale"}, {"c", toJson(m.scaleFactor())}};
        case K::Moebius: {
            const auto c = m.moebiusCoefficients();
            return {{"kind", "moebius"}, {"a", toJson(c[0])}, {"b", toJson(c[1])}, {"c", toJson(c[2])}, {"d", toJson(c[3])}};
        }
        case K::Polynomial: return {{"kind", "polynomial"}, {"coeffs", toJson(m.numerator())}};
        case K::Rational: return {{"kind", "rational"}, {"num", toJson(m.numerator())}, {"den", toJson(m.denominator())}};
        case K::Blaschke: return {{"kind", "blaschke"}, {"theta", toJson(m.innerFunction())}};
        case K::SingularInner: return {{"kind", "singular-inner"}, {"theta", toJson(m.innerFunction())}};
        case K::Compose: return {{"kind", "compose"}, {"outer", toJson(m.outer())}, {"inner", toJson(m.inner())}};
    }
    return {};
}

inline MapExpr mapFrom(const Json& j, const std::string& path = "") {
    const Json& kindJ = member(j, "kind", path);
    if (!kindJ.is_string()) fail(path + "/kind", "expected a string");
    const std::string kind = kindJ.get<std::string>();
    static const std::map<std::string, std::vector<std::string>> fields{
        {"identity", {}}, {"scale", {"c"}}, {"moebius", {"a", "b", "c", "d"}}, {"polynomial", {"coeffs"}},
        {"rational", {"num", "den"}}, {"blaschke", {"theta"}}, {"singular-inner", {"theta"}}, {"compose", {"outer", "inner"}}};
    const auto known = fields.find(kind);
    if (known == fields.end()) fail(path + "/kind", "unknown map kind '" + kind + "'");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "kind" && std::find(known->second.begin(), known->second.end(), it.key()) == known->second.end())
            fail(path + "/" + it.key(), "unknown key");
    try {
        if (kind == "identity") return MapExpr::identity();
        if (kind == "scale") return MapExpr::scale(complexFrom(member(j, "c", path), path + "/c"));
        if (kind == "moebius")
            return MapExpr::moebius(complexFrom(member(j, "a", path), path + "/a"), complexFrom(member(j, "b", path), path + "/b"),
                                    complexFrom(member(j, "c", path), path + "/c"), complexFrom(member(j, "d", path), path + "/d"));
        if (kind == "polynomial") return MapExpr::polynomial(polyFrom(member(j, "coeffs", path), path + "/coeffs"));
        if (kind == "rational")
            return MapExpr::rational(polyFrom(member(j, "num", path), path + "/num"), polyFrom(member(j, "den", path), path + "/den"));
        if (kind == "blaschke") return MapExpr::blaschke(innerFrom(member(j, "theta", path), path + "/theta"));
        if (kind == "singular-inner") return MapExpr::singularInner(innerFrom(member(j, "theta", path), path + "/theta"));
        if (kind == "compose")
            return MapExpr::compose(mapFrom(member(j, "outer", path), path + "/outer"), mapFrom(member(j, "inner", path), path + "/inner"));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidConfig) throw;
        // keep the numeric error code (NotSelfMap, CompositionTooDeep, ...) and add the location
        throw Error(e.code(), (path.empty() ? std::string("/") : path) + ": " + e.what());
    }
    fail(path + "/kind", "unknown map kind '" + kind + "'");
}

}  // namespace modelspace::json
