#pragma once

#include <string>
#include <vector>

namespace chronos {

/// A bundled, ready-to-run scenario.
struct CorpusEntry {
  std::string id;
  std::string description;
  std::string text;
};

const std::vector<CorpusEntry>& corpus();
const CorpusEntry* find_corpus(const std::string& id);

}  // namespace chronos
