#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nplsa {

/// One row per EM iteration (PLSA), sweep (nPLSA) or spawn (growth loops).
/// Columns that do not apply to an algorithm stay empty.
struct TraceRow {
    std::size_t iter = 0;
    std::size_t K = 0;
    double loglik = 0.0;
    std::optional<double> objective;
    std::optional<double> diversity;
    std::optional<double> epsilon;
    std::optional<double> query_distance;
    std::optional<std::size_t> closest_topic;
    std::optional<double> mean_delta;
    double elapsed_ms = 0.0;  // wall-clock time spent in this iteration
    std::string phase;        // "em", "sweep", "grow", "rollback" or "refine"
    std::string note;         // e.g. top words of the closest topic
};

struct RunTrace {
    std::vector<TraceRow> rows;

    double total_ms() const;
};

/// CSV with header
/// iter,K,loglik,objective,diversity,epsilon,query_distance,closest_topic,mean_delta,elapsed_ms,phase,note
void write_trace_csv(std::ostream& out, const RunTrace& trace);
void write_trace_csv_file(const std::string& path, const RunTrace& trace);

}  // namespace nplsa
