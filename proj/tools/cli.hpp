#pragma once

// Commands behind the `anyparse` executable.  They write the report to `out`
// and diagnostics to `err`, and return the process exit code.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "anyparse/snapshot.hpp"

namespace anyparse::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kLoadError = 2,
  kVoidAtDeadline = 3,
  kConfigError = 4,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { Batch, Anytime };
/// Unit of poll intervals, deadlines and script offsets: milliseconds of
/// wall-clock time, or completed producer transactions (deterministic).
enum class Trigger { Ms, Tx };
enum class Format { Text, JsonLines };

struct RunConfig {
  std::vector<std::string> grammar_files;  // rules and lexicon, any split
  std::string lattice;
  Mode mode = Mode::Batch;
  Trigger trigger = Trigger::Ms;
  std::uint64_t poll_interval = 10;
  std::optional<std::uint64_t> deadline;
  std::uint64_t feed_interval_ms = 0;
  StrategyParams params;
  Format format = Format::Text;
  bool with_fs = false;
  /// Stop polling at the first complete, consistent analysis.
  bool stop_when_good = false;

  /// Throws ConfigError.
  void validate() const;
};

struct ScriptAction {
  enum class Kind { Poll, Abort, Reset };
  Kind kind = Kind::Poll;
  std::uint64_t at = 0;
  std::string lattice;  // Reset only
  int line = 0;
};

/// Lines `poll <t>`, `abort <t>`, `reset <t> <lattice>`; `#` starts a
/// comment.  Relative lattice paths are resolved against `base_dir`.
/// Throws ConfigError naming the line.
std::vector<ScriptAction> parse_script(std::istream& in, const std::string& base_dir = "");
std::vector<ScriptAction> parse_script_file(const std::string& path);

int cmd_parse(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_replay(const std::vector<ScriptAction>& script, const RunConfig& config, std::ostream& out,
               std::ostream& err);
int cmd_check(const std::vector<std::string>& grammar_files, std::ostream& out);

}  // namespace anyparse::cli
