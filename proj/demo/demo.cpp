// Regularizes the defective qubit channel from the worked example and prints
// the spectrum before and after.

#include <cstdio>

#include "scf/scf.hpp"

namespace {

void print_spectrum(const char* label, const scf::Superoperator& s) {
  const scf::SpectrumReport r = scf::analyze_spectrum(s.mat);
  std::printf("%s (min gap %.3g, defective %s)\n", label, r.min_gap, r.defective ? "yes" : "no");
  for (const scf::EigenCluster& c : r.clusters)
    std::printf("  %+.6f %+.6fi  alg %d geo %d\n", c.center.real(), c.center.imag(), c.algebraic, c.geometric);
}

}  // namespace

int main() {
  const scf::Superoperator phi = scf::eq1_channel();
  print_spectrum("input", phi);

  const scf::Regularized r = scf::regularize_channel(phi, 0.2);
  std::printf("lambda %.6f, fro distance %.6f, diamond upper %.6f\n", r.report.lambda, r.report.fro_distance,
              r.report.diamond_upper);
  print_spectrum("output", r.output);
  return 0;
}
