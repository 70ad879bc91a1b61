#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include <json.hpp>

#include "relunet/constructors.hpp"
#include "relunet/fnn.hpp"

namespace relunet {

// Shortest decimal that reads back to the same double. Negative zero is
// written "-0.0" so JSON readers keep the sign.
std::string format_double(double v);
// Strict: the whole string must be a finite decimal number. Accepts
// "2^-k" and "2^k" literals as well.
double parse_double(std::string_view text);

nlohmann::json record_to_json(const ConstructionRecord& rec);
ConstructionRecord record_from_json(const nlohmann::json& meta);

// Metadata block written alongside a built network: record, metrics,
// predicted budget, and the matrix for the affine kinds.
nlohmann::json network_meta(const BuiltNetwork& built, const BudgetConstants& constants = {});

// {"meta": ..., "layers": [{"weights": [[...]], "bias": [...]}, ...]}
void write_network(std::ostream& out, const Fnn& fnn, const nlohmann::json& meta);

struct NetworkFile {
  Fnn fnn;
  nlohmann::json meta;
};

// Streams the document, so large dense layers never become a JSON tree.
NetworkFile read_network(std::istream& in);

void save_network(const std::filesystem::path& path, const Fnn& fnn, const nlohmann::json& meta);
NetworkFile load_network(const std::filesystem::path& path);

}  // namespace relunet
