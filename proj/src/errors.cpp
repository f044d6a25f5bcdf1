#include "fusionrec/errors.hpp"

namespace fusionrec {

namespace {

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    if (i == 8) {
      out += "... (" + std::to_string(ids.size()) + " total)";
      break;
    }
    out += ids[i];
  }
  return out;
}

}  // namespace

MissingEmbedding::MissingEmbedding(std::vector<std::string> ids)
    : Error("missing embedding for id(s): " + join_ids(ids)), ids_(std::move(ids)) {}

UnknownSeedId::UnknownSeedId(std::string id)
    : Error("unknown seed id: " + id), id_(std::move(id)) {}

}  // namespace fusionrec
