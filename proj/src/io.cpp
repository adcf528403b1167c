#include "triconv/io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace triconv {

using nlohmann::json;

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::parse_error& e) {
        throw IoError("malformed JSON in '" + path + "': " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

namespace {

json matrix_to_json(const CMat& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json rrow = json::array(), irow = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            rrow.push_back(m(i, j).real());
            irow.push_back(m(i, j).imag());
        }
        re.push_back(std::move(rrow));
        im.push_back(std::move(irow));
    }
    return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

CMat matrix_from_json(const json& j) {
    try {
        const auto& re = j.at("re");
        const auto& im = j.at("im");
        const Eigen::Index rows = static_cast<Eigen::Index>(re.size());
        if (rows == 0) throw IoError("empty matrix");
        const Eigen::Index cols = static_cast<Eigen::Index>(re.at(0).size());
        CMat m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index c = 0; c < cols; ++c)
                m(i, c) = cxd(re.at(static_cast<size_t>(i)).at(static_cast<size_t>(c)).get<double>(),
                              im.at(static_cast<size_t>(i)).at(static_cast<size_t>(c)).get<double>());
        return m;
    } catch (const json::exception& e) {
        throw IoError(std::string("bad matrix JSON: ") + e.what());
    }
}

}  // namespace

json to_json(const ProbVector& v) {
    json entries = json::array();
    for (int i = 0; i < v.dim(); ++i) entries.push_back(v.entries(i));
    return json{{"entries", std::move(entries)}};
}

ProbVector prob_vector_from_json(const json& j) {
    std::vector<double> entries;
    try {
        entries = j.at("entries").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw IoError(std::string("bad probability-vector JSON: ") + e.what());
    }
    RVec v(static_cast<Eigen::Index>(entries.size()));
    for (size_t i = 0; i < entries.size(); ++i) v(static_cast<Eigen::Index>(i)) = entries[i];
    return ProbVector(v);
}

json to_json(const StochTensor& t) {
    return json{{"order", t.order()}, {"dim", t.dim()}, {"entries", t.data()}};
}

StochTensor tensor_from_json(const json& j) {
    int order = 0, dim = 0;
    std::vector<double> entries;
    try {
        order = j.at("order").get<int>();
        dim = j.at("dim").get<int>();
        entries = j.at("entries").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw IoError(std::string("bad tensor JSON: ") + e.what());
    }
    return StochTensor(order, dim, std::move(entries));
}

json to_json(const DensityMatrix& m) {
    json j = matrix_to_json(m.matrix);
    j["dim"] = m.dim();
    return j;
}

DensityMatrix density_from_json(const json& j) {
    CMat m = matrix_from_json(j);
    if (j.contains("dim") && j.at("dim").get<int>() != m.rows())
        throw IoError("density JSON 'dim' does not match the matrix");
    return DensityMatrix(std::move(m));
}

json to_json(const DynamicalMatrix& d) {
    json j = matrix_to_json(d.matrix);
    j["dim"] = d.local_dim;
    j["parts"] = d.parts;
    return j;
}

DynamicalMatrix dynamical_from_json(const json& j) {
    int parts = 0, dim = 0;
    try {
        parts = j.at("parts").get<int>();
        dim = j.at("dim").get<int>();
    } catch (const json::exception& e) {
        throw IoError(std::string("bad dynamical-matrix JSON: ") + e.what());
    }
    return DynamicalMatrix(parts, dim, matrix_from_json(j));
}

json to_json(const KrausSet& k) {
    json ops = json::array();
    for (const CMat& op : k.ops) ops.push_back(matrix_to_json(op));
    return json{{"count", k.count()}, {"out_dim", k.out_dim()}, {"in_dim", k.in_dim()},
                {"ops", std::move(ops)}};
}

KrausSet kraus_from_json(const json& j) {
    std::vector<CMat> ops;
    try {
        for (const auto& op : j.at("ops")) ops.push_back(matrix_from_json(op));
    } catch (const json::exception& e) {
        throw IoError(std::string("bad Kraus JSON: ") + e.what());
    }
    return KrausSet(std::move(ops));
}

json to_json(const BlockBasisFamily& b) {
    json blocks = json::array();
    for (const CMat& blk : b.blocks) blocks.push_back(matrix_to_json(blk));
    return json{{"dim", b.dim()}, {"scheme", to_string(b.scheme)}, {"blocks", std::move(blocks)}};
}

BlockBasisFamily blocks_from_json(const json& j) {
    std::vector<CMat> blocks;
    BlockScheme scheme = BlockScheme::custom;
    try {
        for (const auto& blk : j.at("blocks")) blocks.push_back(matrix_from_json(blk));
        if (j.contains("scheme")) scheme = block_scheme_from_string(j.at("scheme").get<std::string>());
    } catch (const json::exception& e) {
        throw IoError(std::string("bad block-family JSON: ") + e.what());
    }
    return BlockBasisFamily(std::move(blocks), scheme);
}

json to_json(const CoherenceReport& r) {
    return json{{"c2", r.c2},
                {"entropic", r.entropic},
                {"purity", r.purity},
                {"choi_spectrum", r.choi_spectrum}};
}

std::string coherence_report_table(const CoherenceReport& r) {
    std::ostringstream os;
    os << std::setprecision(12);
    os << "quantity        value\n";
    os << "c2              " << r.c2 << "\n";
    os << "entropic (nats) " << r.entropic << "\n";
    os << "purity          " << r.purity << "\n";
    os << "choi spectrum  ";
    for (double v : r.choi_spectrum) os << " " << v;
    os << "\n";
    return os.str();
}

}  // namespace triconv
