#include "chronos/reasoning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace chronos {

Framework Framework::make(DecompositionPtr d, const Context& ctx) {
  ConsistencyReport report = check_consistency(*d, ctx.fam, ctx.metric, ctx.mode, ctx.tol);
  if (!report.verdict)
    throw Error(Errc::InconsistentFramework,
                "family fails " + std::string(consistency_mode_name(ctx.mode)) +
                    " consistency: worst pair (" + std::to_string(report.worst_j) + "," +
                    std::to_string(report.worst_k) + ") magnitude " +
                    std::to_string(report.worst_magnitude));
  std::vector<double> weights;
  weights.reserve(d->minimal().size());
  for (const auto& f : d->minimal()) weights.push_back(weight(f, ctx.fam, ctx.metric));
  return Framework(std::move(d), report, std::move(weights));
}

AlgebraElement Framework::element(std::vector<bool> indicator) const {
  return AlgebraElement(decomp_, std::move(indicator));
}

AlgebraElement Framework::element_of(const ProductHistory& y, double tol) const {
  auto ind = contains(*decomp_, y, tol);
  if (!ind)
    throw Error(Errc::ElementNotInFramework,
                "history is not expressible as a sum of the framework's minimal elements");
  return AlgebraElement(decomp_, std::move(*ind));
}

double Framework::element_weight(const AlgebraElement& e) const {
  if (e.owner() != decomp_)
    throw Error(Errc::OwnerMismatch, "element belongs to a different decomposition");
  double w = 0.0;
  for (size_t i = 0; i < e.indicator().size(); ++i)
    if (e.indicator()[i]) w += (*weights_)[i];
  return w;
}

Framework ignorance_framework(const Context& ctx) {
  const TimeGrid grid(ctx.fam.times());
  ProductHistory full = ProductHistory::identity(grid, ctx.fam.dim());
  return Framework::make(build_decomposition({full}, full, ctx.tol), ctx);
}

double ProbabilityDistribution::probability(const AlgebraElement& e) const {
  if (e.owner() != owner_.decomposition())
    throw Error(Errc::OwnerMismatch, "element belongs to a different decomposition");
  double p = 0.0;
  for (size_t i = 0; i < e.indicator().size(); ++i)
    if (e.indicator()[i]) p += values_[i];
  return p;
}

ProbabilityDistribution assign(const Framework& f, std::vector<double> values,
                               const Context& ctx) {
  if (static_cast<int>(values.size()) != f.decomp().size())
    throw Error(Errc::DimensionMismatch, "one probability per minimal element required");
  const double cutoff = weight_zero_cutoff(f.decomp().dim(), ctx.tol);
  double sum = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0)
      throw Error(Errc::NegativeProbability,
                  "minimal element " + std::to_string(i) + " assigned " + std::to_string(values[i]));
    if (values[i] > ctx.tol_prob && f.minimal_weights()[i] <= cutoff)
      throw Error(Errc::PositiveOnZeroWeight,
                  "minimal element " + std::to_string(i) +
                      " has zero weight (dynamically impossible) but probability " +
                      std::to_string(values[i]));
    sum += values[i];
  }
  if (std::abs(sum - 1.0) > std::max(ctx.tol_prob, 1e-9))
    throw Error(Errc::NotNormalized, "probabilities sum to " + std::to_string(sum));
  return ProbabilityDistribution(f, std::move(values));
}

namespace {

/// Extends every minimal element (and the cap) of a framework's
/// decomposition to a superset grid; the result is again a decomposition.
DecompositionPtr extend_decomposition(const Decomposition& d, const TimeGrid& grid, double tol) {
  if (d.grid() == grid) return nullptr;  // caller keeps the original
  std::vector<ProductHistory> minimal;
  minimal.reserve(d.minimal().size());
  for (const auto& m : d.minimal()) minimal.push_back(m.extend(grid));
  return build_decomposition(std::move(minimal), d.cap().extend(grid), tol);
}

/// Indicator of each coarse minimal element inside the fine framework, after
/// extending both to the merged grid; nullopt when some element (or the cap)
/// is not expressible.
std::optional<std::vector<std::vector<bool>>> refinement_map(const Decomposition& coarse,
                                                             const Decomposition& fine,
                                                             double tol) {
  const TimeGrid grid = TimeGrid::merge(coarse.grid(), fine.grid());
  DecompositionPtr fine_ext = extend_decomposition(fine, grid, tol);
  const Decomposition& fd = fine_ext ? *fine_ext : fine;
  if (!slotwise_contained(coarse.cap().extend(grid), fd.cap(), tol) ||
      !slotwise_contained(fd.cap(), coarse.cap().extend(grid), tol))
    return std::nullopt;
  std::vector<std::vector<bool>> map;
  map.reserve(coarse.minimal().size());
  for (const auto& m : coarse.minimal()) {
    auto ind = contains(fd, m.extend(grid), tol);
    if (!ind) return std::nullopt;
    map.push_back(std::move(*ind));
  }
  return map;
}

}  // namespace

bool is_refinement(const Framework& coarse, const Framework& fine, double tol) {
  return refinement_map(coarse.decomp(), fine.decomp(), tol).has_value();
}

ProbabilityDistribution refine_distribution(const ProbabilityDistribution& pr,
                                            const Framework& fine, const Context& ctx) {
  const Decomposition& coarse = pr.owner().decomp();
  auto map = refinement_map(coarse, fine.decomp(), ctx.tol);
  if (!map)
    throw Error(Errc::NotARefinement,
                "target framework does not refine the distribution's framework");
  // owner_of[k]: the unique coarse element containing fine minimal k
  std::vector<int> owner_of(fine.decomp().size(), -1);
  for (size_t i = 0; i < map->size(); ++i)
    for (size_t k = 0; k < (*map)[i].size(); ++k)
      if ((*map)[i][k]) owner_of[k] = static_cast<int>(i);
  std::vector<double> values(fine.decomp().size(), 0.0);
  const double cutoff = weight_zero_cutoff(coarse.dim(), ctx.tol);
  for (size_t k = 0; k < values.size(); ++k) {
    const int i = owner_of[k];
    if (i < 0) continue;  // outside the coarse cap; cap equality makes this unreachable
    const double pr_i = pr.values()[i];
    if (pr_i == 0.0) continue;  // zero-probability terms are skipped
    const double w_coarse = weight(coarse.minimal()[i], ctx.fam, ctx.metric);
    if (w_coarse <= cutoff) continue;
    values[k] = pr_i * fine.minimal_weights()[k] / w_coarse;
  }
  // The per-branch sums match the coarse probabilities up to consistency
  // residue; rescale so the axioms hold exactly.
  double sum = 0.0;
  for (double v : values) sum += v;
  if (std::abs(sum - 1.0) > 1e-6)
    throw Error(Errc::NotNormalized,
                "refined probabilities sum to " + std::to_string(sum) +
                    "; the fine family does not carry the distribution");
  for (double& v : values) v /= sum;
  return assign(fine, std::move(values), ctx);
}

namespace {

struct GeneratedElement {
  ProductHistory history;
  std::vector<int> sources;  // index of the chosen minimal element per input framework
};

/// Cross products of one minimal element from each framework, zero products
/// dropped, in lexicographic source order.
std::vector<GeneratedElement> cross_products(const std::vector<const Decomposition*>& parts,
                                             const TimeGrid& grid, double tol) {
  std::vector<GeneratedElement> current;
  for (size_t fidx = 0; fidx < parts.size(); ++fidx) {
    const auto& minimal = parts[fidx]->minimal();
    std::vector<GeneratedElement> next;
    for (size_t c = 0; c < (fidx == 0 ? 1 : current.size()); ++c) {
      for (size_t i = 0; i < minimal.size(); ++i) {
        const ProductHistory m = minimal[i].extend(grid);
        if (fidx == 0) {
          GeneratedElement g{m, {static_cast<int>(i)}};
          if (!g.history.is_zero()) next.push_back(std::move(g));
          continue;
        }
        bool zero = false;
        std::vector<Projector> slots;
        for (size_t s = 0; s < m.events().size(); ++s) {
          const CMatrix prod = current[c].history.events()[s].matrix() * m.events()[s].matrix();
          if (inf_norm(prod) <= tol) {
            zero = true;
            break;
          }
          slots.push_back(make_projector(prod, tol));
        }
        if (zero) continue;
        GeneratedElement g{ProductHistory(grid, std::move(slots)), current[c].sources};
        g.sources.push_back(static_cast<int>(i));
        next.push_back(std::move(g));
      }
    }
    current = std::move(next);
  }
  return current;
}

void require_cross_commutation(const std::vector<const Decomposition*>& parts,
                               const TimeGrid& grid, double tol) {
  for (size_t a = 0; a < parts.size(); ++a) {
    for (size_t b = a + 1; b < parts.size(); ++b) {
      for (const auto& ma : parts[a]->minimal()) {
        const ProductHistory ea = ma.extend(grid);
        for (const auto& mb : parts[b]->minimal()) {
          const ProductHistory eb = mb.extend(grid);
          for (size_t s = 0; s < ea.events().size(); ++s)
            if (!commutes(ea.events()[s], eb.events()[s], tol))
              throw Error(Errc::NonCommutingFrameworks,
                          "same-time projectors of the frameworks do not commute; no common "
                          "Boolean algebra exists");
        }
      }
    }
  }
}

struct GeneratedFramework {
  Framework framework;
  std::vector<std::vector<int>> sources;  // per generated minimal element
};

GeneratedFramework generate_common_impl(const std::vector<Framework>& fs, const Context& ctx) {
  if (fs.empty()) throw Error(Errc::IncompleteSum, "no frameworks to combine");
  TimeGrid grid = fs.front().decomp().grid();
  for (const auto& f : fs) grid = TimeGrid::merge(grid, f.decomp().grid());
  std::vector<const Decomposition*> parts;
  for (const auto& f : fs) parts.push_back(&f.decomp());
  require_cross_commutation(parts, grid, ctx.tol);
  auto generated = cross_products(parts, grid, ctx.tol);
  ProductHistory cap = parts.front()->cap().extend(grid);
  for (size_t a = 1; a < parts.size(); ++a)
    cap = history_product(cap, parts[a]->cap().extend(grid), ctx.tol);
  std::vector<ProductHistory> minimal;
  minimal.reserve(generated.size());
  for (auto& g : generated) minimal.push_back(g.history);
  DecompositionPtr d = build_decomposition(std::move(minimal), std::move(cap), ctx.tol);
  ConsistencyReport report = check_consistency(*d, ctx.fam, ctx.metric, ctx.mode, ctx.tol);
  if (!report.verdict)
    throw Error(Errc::InconsistentRefinement,
                "the generated common family fails consistency: worst pair magnitude " +
                    std::to_string(report.worst_magnitude));
  std::vector<std::vector<int>> sources;
  sources.reserve(generated.size());
  for (auto& g : generated) sources.push_back(std::move(g.sources));
  return {Framework::make(std::move(d), ctx), std::move(sources)};
}

}  // namespace

Framework generate_common(const std::vector<Framework>& fs, const Context& ctx) {
  return generate_common_impl(fs, ctx).framework;
}

bool compatible(const std::vector<Framework>& fs, const Context& ctx) {
  try {
    generate_common(fs, ctx);
    return true;
  } catch (const Error& e) {
    if (e.code() == Errc::NonCommutingFrameworks || e.code() == Errc::InconsistentRefinement ||
        e.code() == Errc::NotAProjectorProduct)
      return false;
    throw;
  }
}

CombinedData combine_initial_data(const InitialData& data, const Context& ctx) {
  if (data.items.empty()) {
    Framework ignorance = ignorance_framework(ctx);
    AlgebraElement all = ignorance.element({true});
    ProbabilityDistribution dist = assign(ignorance, {1.0}, ctx);
    return {std::move(ignorance), std::move(all), std::move(dist)};
  }
  for (const auto& item : data.items)
    if (item.element.owner() != item.framework.decomposition())
      throw Error(Errc::OwnerMismatch, "asserted element does not belong to its framework");

  Framework combined = data.items.front().framework;
  std::vector<bool> data_ind = data.items.front().element.indicator();
  if (data.items.size() > 1) {
    std::vector<Framework> fs;
    for (const auto& item : data.items) fs.push_back(item.framework);
    GeneratedFramework gen = [&] {
      try {
        return generate_common_impl(fs, ctx);
      } catch (const Error& e) {
        if (e.code() == Errc::NonCommutingFrameworks || e.code() == Errc::InconsistentRefinement)
          throw Error(Errc::IncompatibleData,
                      std::string("initial data lives in incompatible frameworks (") + e.what() +
                          ")");
        throw;
      }
    }();
    // D = D_1 D_2 ...: a generated minimal element lies in D exactly when
    // every source element was asserted.
    data_ind.assign(gen.sources.size(), false);
    for (size_t k = 0; k < gen.sources.size(); ++k) {
      bool inside = true;
      for (size_t i = 0; i < data.items.size(); ++i)
        if (!data.items[i].element.indicator()[gen.sources[k][i]]) inside = false;
      data_ind[k] = inside;
    }
    combined = std::move(gen.framework);
  }
  AlgebraElement data_element = combined.element(data_ind);
  const double w_data = combined.element_weight(data_element);
  if (w_data <= weight_zero_cutoff(combined.decomp().dim(), ctx.tol))
    throw Error(Errc::ZeroWeightData,
                "the combined data has zero weight; the initial data is inconsistent");
  // Probability 1 for D, 0 for its complement. Within D the prior is the
  // ignorance refinement, i.e. weight-proportional; every query conditions
  // on D, so verdicts do not depend on this split.
  std::vector<double> values(data_ind.size(), 0.0);
  for (size_t i = 0; i < values.size(); ++i)
    if (data_ind[i]) values[i] = combined.minimal_weights()[i] / w_data;
  ProbabilityDistribution dist = assign(combined, std::move(values), ctx);
  return {std::move(combined), std::move(data_element), std::move(dist)};
}

const char* verdict_kind_name(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Probability: return "probability";
    case Verdict::Kind::True: return "true";
    case Verdict::Kind::False: return "false";
    case Verdict::Kind::Meaningless: return "meaningless";
    case Verdict::Kind::DataInconsistent: return "data-inconsistent";
  }
  return "?";
}

namespace {

FrameworkSummary summarize(const Decomposition& d, const ConsistencyReport& r) {
  FrameworkSummary s;
  s.minimal_count = d.size();
  s.grid = d.grid().labels();
  s.worst_magnitude = r.worst_magnitude;
  s.consistent = r.verdict;
  return s;
}

struct CandidateElement {
  ProductHistory history;
  int base = 0;                    // index into the data framework's minimal elements
  std::vector<bool> branch;        // took the asserted side of constraint c?
};

}  // namespace

Verdict query(const InitialData& data, const std::vector<EventConstraint>& targets,
              const std::vector<EventConstraint>& conditions, const Context& ctx) {
  Verdict verdict;
  std::optional<CombinedData> combined;
  try {
    combined = combine_initial_data(data, ctx);
  } catch (const Error& e) {
    if (e.code() == Errc::IncompatibleData || e.code() == Errc::ZeroWeightData) {
      verdict.kind = Verdict::Kind::DataInconsistent;
      verdict.note = e.what();
      return verdict;
    }
    throw;
  }
  const Framework& base = combined->framework;

  std::vector<EventConstraint> constraints = targets;
  constraints.insert(constraints.end(), conditions.begin(), conditions.end());
  TimeGrid grid = base.decomp().grid();
  for (const auto& c : constraints) {
    if (!ctx.fam.has_time(c.time))
      throw Error(Errc::UnknownTime,
                  "query event '" + c.label + "' sits at a time outside the dynamics grid");
    grid = TimeGrid::merge(grid, TimeGrid({c.time}));
  }

  std::vector<CandidateElement> elements;
  for (int i = 0; i < base.decomp().size(); ++i)
    elements.push_back({base.decomp().minimal()[i].extend(grid), i, {}});

  // Fold in each constraint's {E, I-E} partition; non-commuting events mean
  // there is no common framework, hence no meaning.
  for (const auto& c : constraints) {
    const int slot = grid.index_of(c.time);
    if (c.event.dim() != base.decomp().dim())
      throw Error(Errc::DimensionMismatch,
                  "query event '" + c.label + "' has the wrong dimension");
    const Projector comp = complement(c.event);
    std::vector<CandidateElement> next;
    for (const auto& el : elements) {
      if (!commutes(el.history.events()[slot], c.event, ctx.tol)) {
        verdict.kind = Verdict::Kind::Meaningless;
        verdict.note = "event '" + c.label + "' does not commute with the framework at its time";
        verdict.summary = summarize(base.decomp(), base.report());
        return verdict;
      }
      for (int side = 0; side < 2; ++side) {
        const Projector& e = side == 0 ? c.event : comp;
        const CMatrix prod = el.history.events()[slot].matrix() * e.matrix();
        if (inf_norm(prod) <= ctx.tol) continue;
        std::vector<Projector> slots = el.history.events();
        slots[slot] = make_projector(prod, ctx.tol);
        CandidateElement ne{ProductHistory(grid, std::move(slots)), el.base, el.branch};
        ne.branch.push_back(side == 0);
        next.push_back(std::move(ne));
      }
    }
    elements = std::move(next);
  }

  std::vector<ProductHistory> minimal;
  minimal.reserve(elements.size());
  for (const auto& el : elements) minimal.push_back(el.history);
  DecompositionPtr candidate =
      build_decomposition(std::move(minimal), base.decomp().cap().extend(grid), ctx.tol);
  ConsistencyReport report = check_consistency(*candidate, ctx.fam, ctx.metric, ctx.mode, ctx.tol);
  if (!report.verdict) {
    verdict.kind = Verdict::Kind::Meaningless;
    verdict.note = "no consistent framework contains the data and the queried events together";
    verdict.summary = summarize(*candidate, report);
    return verdict;
  }
  Framework record = Framework::make(candidate, ctx);

  // Pr(targets | conditions, data) from the refined ignorance prior within
  // the data element: weight ratios over the candidate's minimal elements.
  const auto& data_ind = combined->data_element.indicator();
  double w_cond = 0.0, w_both = 0.0;
  for (size_t k = 0; k < elements.size(); ++k) {
    const auto& el = elements[k];
    if (!data_ind[el.base]) continue;
    bool cond_ok = true, all_ok = true;
    for (size_t c = 0; c < el.branch.size(); ++c) {
      if (!el.branch[c]) {
        all_ok = false;
        if (c >= targets.size()) cond_ok = false;  // a condition took the complement side
      }
    }
    if (!cond_ok) continue;
    const double w = record.minimal_weights()[k];
    w_cond += w;
    if (all_ok) w_both += w;
  }
  if (w_cond <= weight_zero_cutoff(record.decomp().dim(), ctx.tol))
    throw Error(Errc::ZeroConditionWeight,
                "the condition (with the data) has zero weight; conditioning is undefined");
  const double p = w_both / w_cond;
  verdict.probability = p;
  verdict.framework = record;
  verdict.summary = summarize(record.decomp(), report);
  if (p >= 1.0 - ctx.tol_prob)
    verdict.kind = Verdict::Kind::True;
  else if (p <= ctx.tol_prob)
    verdict.kind = Verdict::Kind::False;
  else
    verdict.kind = Verdict::Kind::Probability;
  return verdict;
}

Classification classify(const Framework& f, const AlgebraElement& y, const Context& ctx) {
  if (y.owner() != f.decomposition())
    throw Error(Errc::OwnerMismatch, "element belongs to a different decomposition");
  const double cutoff = weight_zero_cutoff(f.decomp().dim(), ctx.tol);
  bool covers_all_positive = true;
  bool selects_positive = false;
  for (size_t i = 0; i < y.indicator().size(); ++i) {
    const bool positive = f.minimal_weights()[i] > cutoff;
    if (positive && !y.indicator()[i]) covers_all_positive = false;
    if (positive && y.indicator()[i]) selects_positive = true;
  }
  if (covers_all_positive) return Classification::Tautology;
  if (!selects_positive) return Classification::Contradiction;
  return Classification::Contingent;
}

}  // namespace chronos
