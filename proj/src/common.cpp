#include "varireg/common/error.hpp"
#include "varireg/common/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace varireg {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::parse: return "parse error";
    case Errc::index_out_of_range: return "index out of range";
    case Errc::empty_mesh: return "empty mesh";
    case Errc::degenerate_face: return "degenerate face";
    case Errc::io: return "I/O error";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::size_mismatch: return "size mismatch";
    case Errc::connectivity_mismatch: return "connectivity mismatch";
    case Errc::non_finite: return "non-finite value";
    case Errc::unreachable_target: return "unreachable target";
    case Errc::degenerate_configuration: return "degenerate configuration";
    case Errc::non_stabilizing_quadrature: return "non-stabilizing quadrature";
  }
  return "unknown error";
}

void set_thread_count(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace varireg
