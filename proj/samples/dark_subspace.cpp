// Dark subspace of a few small networks and the population each one traps.

#include <iostream>

#include <qdark/qdark.hpp>

int main() {
  using namespace qdark;
  const std::vector<std::pair<const char*, GraphKind>> networks{
      {"trimer", kind::Trimer{}}, {"complete8", kind::Complete{8}}, {"path5", kind::Path{5}}};
  for (const auto& [name, spec] : networks) {
    const auto g = generate_graph(spec);
    const int n = g.size();
    const auto rep = dark_report(decompose(g), n);
    const auto model = build_model(g, {}, n, 1.0);
    const auto a = asymptotic_transfer(model, QuantumState::localized(n, 1));
    std::cout << name << ": dark dimension " << rep.dark_dimension << ", predicted trapped from node 1 "
              << format_double(predict_trapped(rep, 1)) << ", simulated " << format_double(1.0 - a.p_sink) << "\n";
  }
}
