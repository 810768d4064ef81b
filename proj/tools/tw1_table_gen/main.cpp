// Regenerates the shipped TW1 table from the Fredholm determinant oracle.
#include <cstdio>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "lcrm/tw_dist.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Tabulate the TW1 CDF"};
  std::string out = "tw1_table.txt";
  double lo = lcrm::kTwLower, hi = lcrm::kTwUpper, step = 0.005;
  lcrm::OracleParams params;
  app.add_option("-o,--out", out, "output path");
  app.add_option("--lo", lo);
  app.add_option("--hi", hi);
  app.add_option("--step", step);
  app.add_option("--nodes", params.nodes, "Gauss-Legendre nodes");
  app.add_option("--margin", params.upper_margin, "integrate on [s, max(s,0) + margin]");
  CLI11_PARSE(app, argc, argv);

  const auto table = lcrm::Tw1Table::build(lo, hi, step, params);
  std::ostringstream header;
  header << "TW1 cumulative distribution function F1(s), beta = 1\n"
         << "F1(s) = det(I - K) on L2(s, inf), K(x, y) = Ai((x + y)/2) / 2\n"
         << "Nystrom discretization, Gauss-Legendre nodes=" << params.nodes << " on [s, max(s,0) + "
         << params.upper_margin << "]\n"
         << "lo=" << lo << " hi=" << hi << " step=" << step << "\n"
         << "mean=" << table.mean() << " variance=" << table.variance() << "\n"
         << "columns: s F1(s)";
  table.save(out, header.str());
  std::printf("wrote %zu knots to %s (mean %.6f, variance %.6f)\n", table.knots().size(), out.c_str(), table.mean(),
              table.variance());
  return 0;
}
