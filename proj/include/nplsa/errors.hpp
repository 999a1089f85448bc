#pragma once

#include <stdexcept>
#include <string>

namespace nplsa {

/// Bad or inconsistent input data: unreadable files, malformed corpora,
/// vocabulary mismatches, queries that match nothing.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The algorithm could not produce a result: topic explosion, an
/// unsatisfiable distinctness filter, an unmodelable word.
class AlgorithmError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Emit a warning on stderr unless warnings are silenced.
void warn(const std::string& message);

/// Globally silence or re-enable warnings (tests silence them).
void set_warnings_enabled(bool enabled);

}  // namespace nplsa
