#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ptm/sampler.hpp"
#include "ptm/workload.hpp"

namespace ptm {

inline constexpr const char* kToolkitVersion = "1.0.0";

/// Ordered flat `key=value` block.
class Manifest {
 public:
  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(std::ostream& out) const;
  static Manifest read(std::istream& in, const std::string& name);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// 64-bit FNV-1a of the file contents, as 16 hex digits.
std::string file_digest(const std::string& path);

struct CountsDump {
  Mode mode = Mode::lda;
  TopicCounts counts;
};

/// Header line `ptm-counts 1 mode=<m> docs=D topics=K words=W timestamps=WTS`,
/// then D rows of C_Theta, K rows of C_Phi (topic x word) and, in BoT mode,
/// K rows of C_Pi (topic x timestamp). Integers are space-separated.
void write_counts(std::ostream& out, const CountsDump& dump);
CountsDump read_counts(std::istream& in, const std::string& name);

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace);
std::vector<TracePoint> read_trace_csv(std::istream& in, const std::string& name);

/// One row-group id per document line, then one column-group id per word line.
void write_partition(std::ostream& out, const Partitioning& partitioning);

}  // namespace ptm
