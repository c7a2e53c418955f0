#include "svgd/parallel.hpp"

#include <omp.h>

namespace svgd {
namespace {
int default_threads() {
  static const int n = omp_get_max_threads();
  return n;
}
}  // namespace

void set_max_threads(int threads) { omp_set_num_threads(threads > 0 ? threads : default_threads()); }

int max_threads() { return omp_get_max_threads(); }

}  // namespace svgd
