#pragma once

#include "triconv/classical.hpp"
#include "triconv/coherify.hpp"
#include "triconv/qchannel.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>

namespace triconv {

/// Raised on unreadable files or malformed JSON (CLI exit 3); semantic
/// failures keep throwing ValidationError (CLI exit 2).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

nlohmann::json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

nlohmann::json to_json(const ProbVector& v);
ProbVector prob_vector_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StochTensor& t);
StochTensor tensor_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DensityMatrix& m);
DensityMatrix density_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DynamicalMatrix& d);
DynamicalMatrix dynamical_from_json(const nlohmann::json& j);

nlohmann::json to_json(const KrausSet& k);
KrausSet kraus_from_json(const nlohmann::json& j);

nlohmann::json to_json(const BlockBasisFamily& b);
BlockBasisFamily blocks_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CoherenceReport& r);
std::string coherence_report_table(const CoherenceReport& r);

}  // namespace triconv
