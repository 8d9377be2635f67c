#pragma once

// The chart parser as an anytime producer.
//
// One loop iteration is: wait at the optional step gate, poll the mailbox,
// run one parser transaction, log it, publish a snapshot if the strategy
// asks for one, and count the transaction.  run_batch runs the same loop
// without a consumer.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "anyparse/apc.hpp"
#include "anyparse/chart_parser.hpp"
#include "anyparse/snapshot.hpp"

namespace anyparse {

struct TransactionRecord {
  std::uint64_t seq = 0;  // 1-based within the run
  std::uint64_t run = 0;
  TaskKind kind = TaskKind::Scan;
  std::int64_t duration_ns = 0;
  std::size_t edges_added = 0;
  std::size_t failures = 0;
  bool published = false;
  std::size_t analyses = 0;    // analyses in the published snapshot, if any
  bool completes_full = false; // added a start-category edge over the whole lattice
};

/// `with_duration` false drops the only wall-clock field.
std::string record_json(const TransactionRecord& r, bool with_duration = true);

/// Append-only, shared between the producer and whoever inspects it.
class TransactionLog {
 public:
  void append(const TransactionRecord& r);
  std::vector<TransactionRecord> records() const;
  std::vector<TransactionRecord> records_of_run(std::uint64_t run) const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<TransactionRecord> records_;
};

/// Lets a consumer meter the producer's transactions, for deterministic
/// replays.  The producer calls arrive() before each transaction and
/// completed() after it.
class StepGate {
 public:
  /// Producer side.  Blocks until a transaction is allowed (true) or a nudge
  /// asks the producer to look at its mailbox (false).
  bool arrive();
  void completed();
  void started_run();
  void finished_run();

  /// Consumer side.
  void allow_until(std::uint64_t total);
  void release();
  void nudge();
  /// Waits until `total` transactions completed or the run finished; returns
  /// the completed count.
  std::uint64_t wait_completed(std::uint64_t total);
  /// Waits until the producer is blocked at the gate or finished.
  std::uint64_t wait_blocked();

  std::uint64_t completed_count() const;
  bool finished() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::uint64_t completed_ = 0;
  std::uint64_t allowed_ = 0;
  bool released_ = false;
  bool nudged_ = false;
  bool finished_ = false;
  bool waiting_ = false;
};

/// Hypotheses arriving while the parser runs.
class HypothesisFeed {
 public:
  void push(WordHypothesis h);
  void close();
  /// Everything pushed since the last take.
  std::vector<WordHypothesis> take();
  bool closed_and_drained() const;
  /// Waits up to `timeout` for new input or closing.
  void wait(std::chrono::milliseconds timeout);

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<WordHypothesis> queue_;
  bool closed_ = false;
};

struct ParseInput {
  std::vector<WordHypothesis> hypotheses;  // available from the start
  std::shared_ptr<HypothesisFeed> feed;    // more to come, when set
};

struct ParseJob {
  std::shared_ptr<const Grammar> grammar;
  std::shared_ptr<const Lexicon> lexicon;
  StrategyParams params;
  std::shared_ptr<TransactionLog> log;
  std::shared_ptr<StepGate> gate;
  /// Called in the producer with every published snapshot.
  std::function<void(const ParseSnapshot&)> on_publish;
};

std::uint64_t next_run_id();

/// One parser run: the state behind the producer loop.
class ParseRun {
 public:
  enum class Progress { Stepped, Waiting, Done };

  ParseRun(const ParseJob& job, ParseInput input);

  /// Runs at most one transaction.  Publication goes through `publish`.
  Progress advance(const std::function<void(ParseSnapshot)>& publish);

  std::uint64_t run_id() const { return run_id_; }
  std::uint64_t transactions() const { return transactions_; }
  const ChartParser& parser() const { return *parser_; }
  std::shared_ptr<const ChartParser> release_parser() { return std::move(parser_); }
  const std::optional<ParseSnapshot>& last_published() const { return last_; }

 private:
  void pull_feed();
  bool finish_if_possible();
  void publish(const std::function<void(ParseSnapshot)>& sink, bool finalized);

  const ParseJob& job_;
  ParseInput input_;
  std::uint64_t run_id_;
  std::shared_ptr<ChartParser> parser_;
  SnapshotAssembler assembler_;
  std::uint64_t transactions_ = 0;
  std::size_t scanned_ = 0;
  std::optional<ParseSnapshot> last_;
};

struct BatchResult {
  ParseSnapshot final_snapshot;
  std::shared_ptr<const ChartParser> parser;
  std::uint64_t run_id = 0;
};

/// Runs to quiescence after finalization, synchronously.
BatchResult run_batch(const ParseJob& job, ParseInput input);

using ParseProcess = apc::ProcessHandle<ParseSnapshot, ParseInput>;

/// Starts the producer loop in its own context.  Reset restarts it with a
/// new input and a new run id.
ParseProcess start_parse(ParseJob job, ParseInput input);

// ---------------------------------------------------------------------------
// Result production granularity

struct KindStats {
  std::size_t count = 0;
  double mean_ms = 0;
};

struct RpgReport {
  std::size_t count = 0;
  std::int64_t total_ns = 0;
  double mean_ms = 0;
  double max_ms = 0;
  /// Snapshots to expect within a 500 ms delay: 500 / mean_ms.
  double expected_per_500ms = 0;
  /// Upper bounds in ns of each bucket; the last bucket is open.
  std::vector<std::int64_t> bucket_bounds_ns;
  std::vector<std::size_t> histogram;
  std::map<std::string, KindStats> per_kind;
};

/// Throws std::invalid_argument on an empty log.
RpgReport measure_rpg(const std::vector<TransactionRecord>& log);

std::string rpg_json(const RpgReport& r);
std::string rpg_text(const RpgReport& r);

}  // namespace anyparse
