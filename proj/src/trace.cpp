#include "nplsa/trace.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>

#include "nplsa/errors.hpp"

namespace nplsa {

double RunTrace::total_ms() const {
    double total = 0.0;
    for (const auto& r : rows) total += r.elapsed_ms;
    return total;
}

namespace {

template <typename T>
void put(std::ostream& out, const std::optional<T>& v) {
    out << ',';
    if (v) out << *v;
}

}  // namespace

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
    out << "iter,K,loglik,objective,diversity,epsilon,query_distance,closest_topic,mean_delta,elapsed_ms,phase,note\n";
    out << std::setprecision(17);
    for (const auto& r : trace.rows) {
        out << r.iter << ',' << r.K << ',' << r.loglik;
        put(out, r.objective);
        put(out, r.diversity);
        put(out, r.epsilon);
        put(out, r.query_distance);
        put(out, r.closest_topic);
        put(out, r.mean_delta);
        out << ',' << std::setprecision(6) << r.elapsed_ms << std::setprecision(17) << ',' << r.phase << ','
            << r.note << '\n';
    }
}

void write_trace_csv_file(const std::string& path, const RunTrace& trace) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    write_trace_csv(out, trace);
}

}  // namespace nplsa
