#include "chronos/corpus.hpp"

#include <utility>

namespace chronos {

namespace {

struct RawEntry {
  const char* id;
  const char* text;
};

const RawEntry kRaw[] = {
#include "corpus_data.inc"
};

const char* description_of(const std::string& id) {
  if (id == "spin-half")
    return "spin-half particle at one time: the Sz and Sx sample spaces and their incompatibility";
  if (id == "oscillator")
    return "truncated harmonic oscillator: what a projector means depends on its framework";
  if (id == "spin-measurement")
    return "spin measurement, pure-state apparatus model over three times";
  if (id == "spin-measurement-mixed")
    return "spin measurement with a multiplicity-3 apparatus subspace per branch";
  if (id == "three-state")
    return "three-state interference: contrary certainties in incompatible frameworks";
  return "";
}

}  // namespace

const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> entries = [] {
    std::vector<CorpusEntry> out;
    for (const RawEntry& raw : kRaw) out.push_back({raw.id, description_of(raw.id), raw.text});
    return out;
  }();
  return entries;
}

const CorpusEntry* find_corpus(const std::string& id) {
  for (const CorpusEntry& e : corpus())
    if (e.id == id) return &e;
  return nullptr;
}

}  // namespace chronos
