#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tart/rng.hpp"

namespace tart {

struct BenchConfig {
    std::vector<int> depths = {8, 10, 12};
    int window = 2;
    int stride = 2;
    int batch = 1024;
    int repeats = 5;  // timed repetitions; one extra warmup pass is discarded
    uint64_t seed = 0;
};

struct BenchRow {
    int depth = 0;
    std::string path;        // "tconv" or "naive"
    long long nodes = 0;     // total nodes in the tree
    double seconds = 0.0;    // median wall time for one whole-batch pass
    double speedup = 1.0;    // naive seconds / tconv seconds
};

// Times batched arrival-probability inference through random column-stochastic
// local transitions: the transposed-convolution path against the materialized
// transition-matrix chain. Both paths are checked for elementwise agreement
// (throws beyond equivalence_tol) before any timing. Two rows per depth,
// naive first. The clock is monotonic and the median is over `repeats` runs,
// warmup excluded.
std::vector<BenchRow> run_bench(const BenchConfig& cfg,
                                double equivalence_tol = 1e-12);

// CSV: depth,path,nodes,seconds,speedup
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

} // namespace tart
