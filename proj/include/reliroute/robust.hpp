#pragma once

#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "reliroute/csv.hpp"
#include "reliroute/error.hpp"
#include "reliroute/netmodel.hpp"

namespace reliroute {

enum class ElementType { road_link, rail_link, terminal };

inline const char* to_string(ElementType t) {
  switch (t) {
    case ElementType::road_link: return "road_link";
    case ElementType::rail_link: return "rail_link";
    case ElementType::terminal: return "terminal";
  }
  return "?";
}

inline std::optional<ElementType> element_type_from_string(std::string_view s) {
  if (s == "road_link") return ElementType::road_link;
  if (s == "rail_link") return ElementType::rail_link;
  if (s == "terminal") return ElementType::terminal;
  return std::nullopt;
}

// A capacitated network element: a road link, a rail link or a terminal.
struct ElementRef {
  ElementType type = ElementType::road_link;
  std::string id;  // link id, or terminal node id

  auto operator<=>(const ElementRef&) const = default;
};

struct UncertaintySpec {
  ElementRef element;
  double lambda = 0;  // half-width of the relative capacity perturbation
  double q = 1;       // bound on the probability that flow exceeds realized capacity
};

struct CapacityReduction {
  ElementRef element;
  double nominal_capacity = 0;
  double lambda = 0;
  double q = 1;
  double theta = 0;
  double effective_capacity = 0;
};

namespace detail {
inline void check_reduction_domain(double nominal_capacity, double lambda, double q) {
  if (!(nominal_capacity >= 0) || !std::isfinite(nominal_capacity)) {
    throw DomainError("nominal capacity must be a finite value >= 0");
  }
  if (!(lambda >= 0 && lambda <= 1)) throw DomainError("lambda must lie in [0, 1]");
  if (!(q > 0 && q <= 1)) throw DomainError("q must lie in (0, 1]");
}
}  // namespace detail

// Buffer sqrt(-2 ln q) * Q * lambda. Planning against Q - theta bounds the
// probability that assigned flow exceeds Q(1 + lambda * xi) by q for any
// symmetric xi supported on [-1, 1].
inline double capacity_reduction(double nominal_capacity, double lambda, double q) {
  detail::check_reduction_domain(nominal_capacity, lambda, q);
  if (lambda == 0 || q == 1) return 0.0;
  return std::sqrt(-2.0 * std::log(q)) * nominal_capacity * lambda;
}

inline double effective_capacity(double nominal_capacity, double lambda, double q) {
  return std::max(nominal_capacity - capacity_reduction(nominal_capacity, lambda, q), 0.0);
}

inline CapacityReduction make_reduction(ElementRef element, double nominal, double lambda, double q) {
  CapacityReduction r;
  r.element = std::move(element);
  r.nominal_capacity = nominal;
  r.lambda = lambda;
  r.q = q;
  r.theta = capacity_reduction(nominal, lambda, q);
  r.effective_capacity = std::max(nominal - r.theta, 0.0);
  return r;
}

// Reductions for every capacitated element; `link[i]` matches net.links()[i]
// and `terminal[t]` matches net.terminals()[t].
struct ReductionTable {
  std::vector<CapacityReduction> link;
  std::vector<CapacityReduction> terminal;

  std::vector<CapacityReduction> all() const {
    std::vector<CapacityReduction> out = link;
    out.insert(out.end(), terminal.begin(), terminal.end());
    return out;
  }

  // Sets an element's effective capacity to zero, the outright loss of the
  // element.
  void knock_out(const ElementRef& e) {
    for (auto* v : {&link, &terminal}) {
      for (auto& r : *v) {
        if (r.element == e) {
          r.theta = r.nominal_capacity;
          r.effective_capacity = 0;
          return;
        }
      }
    }
    throw ReferenceError("unknown element '" + e.id + "'");
  }
};

inline ElementRef element_of_link(const IntermodalNetwork& net, std::size_t link) {
  const auto& l = net.links()[link];
  return {l.mode == Mode::road ? ElementType::road_link : ElementType::rail_link, l.id};
}

inline ReductionTable reduction_table(const IntermodalNetwork& net, const std::vector<UncertaintySpec>& specs) {
  std::set<ElementRef> seen;
  for (const auto& s : specs) {
    if (!seen.insert(s.element).second) {
      throw ConfigurationError("duplicate uncertainty spec for " + std::string(to_string(s.element.type)) + " '" +
                               s.element.id + "'");
    }
    if (s.element.type == ElementType::terminal) {
      if (!net.find_terminal(s.element.id)) throw ReferenceError("unknown terminal '" + s.element.id + "'");
    } else {
      auto l = net.find_link(s.element.id);
      if (!l) throw ReferenceError("unknown link '" + s.element.id + "'");
      if (element_of_link(net, *l).type != s.element.type) {
        throw ReferenceError("link '" + s.element.id + "' is not a " + to_string(s.element.type));
      }
    }
  }
  auto spec_for = [&](const ElementRef& e) -> const UncertaintySpec* {
    for (const auto& s : specs) {
      if (s.element == e) return &s;
    }
    return nullptr;
  };
  ReductionTable out;
  out.link.reserve(net.links().size());
  for (std::size_t i = 0; i < net.links().size(); ++i) {
    ElementRef e = element_of_link(net, i);
    const auto* s = spec_for(e);
    out.link.push_back(make_reduction(e, net.links()[i].capacity, s ? s->lambda : 0.0, s ? s->q : 1.0));
  }
  for (const auto& t : net.terminals()) {
    ElementRef e{ElementType::terminal, t.node_id};
    const auto* s = spec_for(e);
    out.terminal.push_back(make_reduction(e, t.capacity, s ? s->lambda : 0.0, s ? s->q : 1.0));
  }
  return out;
}

inline ReductionTable deterministic_reductions(const IntermodalNetwork& net) { return reduction_table(net, {}); }

// scenario.csv: `element_type,element_id,lambda,q`.
inline std::vector<UncertaintySpec> load_scenario(const std::filesystem::path& file) {
  auto t = csv::Table::read(file);
  t.require({"element_type", "element_id", "lambda", "q"});
  std::vector<UncertaintySpec> out;
  for (const auto& row : t.rows()) {
    const std::string where = t.where(row);
    auto type = element_type_from_string(t.get(row, "element_type"));
    if (!type) throw SchemaError(where + ": element_type must be road_link, rail_link or terminal");
    UncertaintySpec s;
    s.element = {*type, t.get(row, "element_id")};
    s.lambda = csv::parse_double(t.get(row, "lambda"), where + " lambda");
    s.q = csv::parse_double(t.get(row, "q"), where + " q");
    try {
      detail::check_reduction_domain(0.0, s.lambda, s.q);
    } catch (const DomainError& e) {
      throw DomainError(where + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace reliroute
