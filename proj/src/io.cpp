#include "kronord/io.hpp"

namespace kronord {

Json matrix_to_json(const QMatrix& M) {
    Json rows = Json::array();
    for (int i = 0; i < M.rows; ++i) {
        Json r = Json::array();
        for (int j = 0; j < M.cols; ++j) r.push_back(to_string(M(i, j)));
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {
mpq_class scalar_from_json(const Json& v) {
    if (v.is_string()) return parse_scalar(v.get<std::string>());
    if (v.is_number_integer()) return mpq_class(v.get<long>());
    throw Error("scalar must be an \"a/b\" string or an integer");
}
}  // namespace

QMatrix matrix_from_json(const Json& j) {
    if (!j.is_array()) throw Error("matrix must be an array of rows");
    const int r = static_cast<int>(j.size());
    const int c = r ? static_cast<int>(j[0].size()) : 0;
    QMatrix M(r, c);
    for (int i = 0; i < r; ++i) {
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != c) throw Error("ragged matrix");
        for (int k = 0; k < c; ++k) M(i, k) = scalar_from_json(j[i][k]);
    }
    return M;
}

Json lattice_to_json(const Lattice& L) {
    return Json{{"rank", L.rank}, {"actX", matrix_to_json(L.actX)}, {"actY", matrix_to_json(L.actY)}, {"name", L.name}};
}

Lattice lattice_from_json(const Json& j) {
    Lattice L;
    L.rank = j.at("rank").get<int>();
    L.actX = matrix_from_json(j.at("actX"));
    L.actY = matrix_from_json(j.at("actY"));
    if (L.rank == 0) {
        L.actX = OMatrix(0, 0);
        L.actY = OMatrix(0, 0);
    }
    L.name = j.value("name", "");
    if (!L.valid()) throw Error("lattice JSON: actions are not commuting square-zero O-matrices of size rank");
    return L;
}

Json modk_to_json(const ModK& M) {
    auto km = [](const KMatrix& A) {
        Json rows = Json::array();
        for (int i = 0; i < A.rows; ++i) {
            Json r = Json::array();
            for (int j = 0; j < A.cols; ++j) r.push_back(A(i, j));
            rows.push_back(std::move(r));
        }
        return rows;
    };
    return Json{{"dim", M.dim}, {"actX", km(M.actX)}, {"actY", km(M.actY)}};
}

ModK modk_from_json(const Json& j) {
    ModK M;
    M.dim = j.at("dim").get<int>();
    auto km = [&](const Json& a) {
        KMatrix A(M.dim, M.dim);
        if (!a.is_array() || static_cast<int>(a.size()) != M.dim) throw Error("ModK JSON: wrong row count");
        for (int i = 0; i < M.dim; ++i) {
            if (static_cast<int>(a[i].size()) != M.dim) throw Error("ModK JSON: wrong column count");
            for (int k = 0; k < M.dim; ++k) A(i, k) = fp_from_int(a[i][k].get<long long>());
        }
        return A;
    };
    M.actX = km(j.at("actX"));
    M.actY = km(j.at("actY"));
    if (!M.valid()) throw Error("ModK JSON: actions are not commuting square-zero matrices");
    return M;
}

namespace {
std::string kind_code(Kind k) {
    switch (k) {
        case Kind::Proj: return "P";
        case Kind::H: return "H";
        case Kind::V: return "V";
        case Kind::B: return "B";
        case Kind::Binf: return "Binf";
    }
    return "?";
}
}  // namespace

Json decomposition_to_json(const Decomposition& d) {
    Json out = Json::array();
    for (const auto& [l, k] : d) {
        Json e{{"label", kind_code(l.kind)}, {"mult", k}};
        if (l.kind == Kind::B) e["param"] = Json::array({l.lambda, l.n});
        else if (l.kind != Kind::Proj) e["param"] = l.n;
        out.push_back(std::move(e));
    }
    return out;
}

Decomposition decomposition_from_json(const Json& j) {
    Decomposition d;
    for (const auto& e : j) {
        std::string code = e.at("label").get<std::string>();
        SummandLabel l;
        if (code == "P") l = label_proj();
        else if (code == "H") l = label_h(e.at("param").get<int>());
        else if (code == "V") l = label_v(e.at("param").get<int>());
        else if (code == "Binf") l = label_binf(e.at("param").get<int>());
        else if (code == "B") l = label_b(fp_from_int(e.at("param")[0].get<long long>()), e.at("param")[1].get<int>());
        else throw Error("decomposition JSON: unknown label " + code);
        d[l] += e.at("mult").get<int>();
    }
    return d;
}

}  // namespace kronord
