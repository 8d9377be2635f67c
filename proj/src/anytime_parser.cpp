#include "anyparse/anytime_parser.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace anyparse {

std::string record_json(const TransactionRecord& r, bool with_duration) {
  nlohmann::json j{{"seq", r.seq},
                   {"run", r.run},
                   {"kind", to_string(r.kind)},
                   {"duration_ns", r.duration_ns},
                   {"edges_added", r.edges_added},
                   {"failures", r.failures},
                   {"published", r.published},
                   {"analyses", r.analyses},
                   {"completes_full", r.completes_full}};
  if (!with_duration) j.erase("duration_ns");
  return j.dump();
}

void TransactionLog::append(const TransactionRecord& r) {
  std::lock_guard lock(mu_);
  records_.push_back(r);
}

std::vector<TransactionRecord> TransactionLog::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::vector<TransactionRecord> TransactionLog::records_of_run(std::uint64_t run) const {
  std::lock_guard lock(mu_);
  std::vector<TransactionRecord> out;
  for (const auto& r : records_) {
    if (r.run == run) out.push_back(r);
  }
  return out;
}

std::size_t TransactionLog::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

// --- StepGate

bool StepGate::arrive() {
  std::unique_lock lock(mu_);
  waiting_ = true;
  cv_.notify_all();
  cv_.wait(lock, [&] { return released_ || nudged_ || completed_ < allowed_; });
  waiting_ = false;
  if (released_ || completed_ < allowed_) return true;
  nudged_ = false;
  return false;
}

void StepGate::completed() {
  std::lock_guard lock(mu_);
  ++completed_;
  cv_.notify_all();
}

void StepGate::started_run() {
  std::lock_guard lock(mu_);
  finished_ = false;
}

void StepGate::finished_run() {
  std::lock_guard lock(mu_);
  finished_ = true;
  cv_.notify_all();
}

void StepGate::allow_until(std::uint64_t total) {
  std::lock_guard lock(mu_);
  allowed_ = std::max(allowed_, total);
  cv_.notify_all();
}

void StepGate::release() {
  std::lock_guard lock(mu_);
  released_ = true;
  cv_.notify_all();
}

void StepGate::nudge() {
  std::lock_guard lock(mu_);
  nudged_ = true;
  cv_.notify_all();
}

std::uint64_t StepGate::wait_completed(std::uint64_t total) {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return completed_ >= total || finished_; });
  return completed_;
}

std::uint64_t StepGate::wait_blocked() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return (waiting_ && !released_ && completed_ >= allowed_) || finished_; });
  return completed_;
}

std::uint64_t StepGate::completed_count() const {
  std::lock_guard lock(mu_);
  return completed_;
}

bool StepGate::finished() const {
  std::lock_guard lock(mu_);
  return finished_;
}

// --- HypothesisFeed

void HypothesisFeed::push(WordHypothesis h) {
  validate(h);
  {
    std::lock_guard lock(mu_);
    if (closed_) throw std::logic_error("push to a closed hypothesis feed");
    queue_.push_back(std::move(h));
  }
  cv_.notify_all();
}

void HypothesisFeed::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::vector<WordHypothesis> HypothesisFeed::take() {
  std::lock_guard lock(mu_);
  std::vector<WordHypothesis> out(queue_.begin(), queue_.end());
  queue_.clear();
  return out;
}

bool HypothesisFeed::closed_and_drained() const {
  std::lock_guard lock(mu_);
  return closed_ && queue_.empty();
}

void HypothesisFeed::wait(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return closed_ || !queue_.empty(); });
}

// --- ParseRun

std::uint64_t next_run_id() {
  static std::atomic<std::uint64_t> id{1};
  return id.fetch_add(1);
}

ParseRun::ParseRun(const ParseJob& job, ParseInput input)
    : job_(job),
      input_(std::move(input)),
      run_id_(next_run_id()),
      parser_(std::make_shared<ChartParser>(job.grammar, job.lexicon, ParserOptions{job.params.beam})),
      assembler_(job.params, run_id_) {
  for (auto& h : input_.hypotheses) {
    validate(h);
    parser_->feed(std::move(h));
  }
  input_.hypotheses.clear();
  if (!input_.feed) parser_->end_input();
}

void ParseRun::pull_feed() {
  if (!input_.feed || parser_->input_ended()) return;
  for (auto& h : input_.feed->take()) parser_->feed(std::move(h));
  if (input_.feed->closed_and_drained()) parser_->end_input();
}

// Starts finalization once parsing is over; true when nothing is left.
bool ParseRun::finish_if_possible() {
  if (parser_->has_work() || !parser_->input_ended()) return false;
  if (!parser_->finalization_started()) parser_->finalize_utterance();
  return parser_->done();
}

void ParseRun::publish(const std::function<void(ParseSnapshot)>& sink, bool finalized) {
  ParseSnapshot s = assembler_.assemble(*parser_, transactions_, scanned_, finalized);
  if (job_.on_publish) job_.on_publish(s);
  last_ = s;
  sink(std::move(s));
}

ParseRun::Progress ParseRun::advance(const std::function<void(ParseSnapshot)>& sink) {
  pull_feed();
  if (!parser_->has_work()) {
    if (finish_if_possible()) {
      // Only reached without a final transaction: empty input, or input
      // that closed while the parser was idle.
      if (!last_ || !last_->finalized) publish(sink, true);
      return Progress::Done;
    }
    if (!parser_->has_work()) return Progress::Waiting;
  }

  const TransactionOutcome out = parser_->step();
  ++transactions_;
  if (out.kind && *out.kind == TaskKind::Scan) ++scanned_;

  const Category& start = job_.params.start_category;
  bool new_start = false, new_passive = false, completes_full = false;
  for (EdgeId id : out.edges_added) {
    const Edge& e = parser_->chart().edge(id);
    if (!e.passive()) continue;
    new_passive = true;
    if (e.category() == start) {
      new_start = true;
      if (!e.refines && e.from == 0 && e.to == parser_->lattice().vertex_count()) {
        completes_full = true;
      }
    }
  }
  pull_feed();
  const bool done = finish_if_possible();
  const bool due = transactions_ % job_.params.publish_every == 0 || new_start ||
                   (job_.params.fragment_first && new_passive) || done;

  TransactionRecord rec;
  rec.seq = transactions_;
  rec.run = run_id_;
  rec.kind = *out.kind;
  rec.duration_ns = out.duration.count();
  rec.edges_added = out.edges_added.size();
  rec.failures = out.failures;
  rec.completes_full = completes_full;
  if (due) {
    publish(sink, done);
    rec.published = true;
    rec.analyses = last_->analyses.size();
  }
  if (job_.log) job_.log->append(rec);
  return done ? Progress::Done : Progress::Stepped;
}

BatchResult run_batch(const ParseJob& job, ParseInput input) {
  job.params.validate();
  ParseRun run(job, std::move(input));
  auto ignore = [](ParseSnapshot) {};
  for (;;) {
    const auto p = run.advance(ignore);
    if (p == ParseRun::Progress::Done) break;
    if (p == ParseRun::Progress::Waiting) {
      // Only possible with a feed; its owner closes it eventually.
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
  }
  BatchResult r;
  r.final_snapshot = *run.last_published();
  r.run_id = run.run_id();
  r.parser = run.release_parser();
  return r;
}

ParseProcess start_parse(ParseJob job, ParseInput input) {
  job.params.validate();
  auto shared = std::make_shared<const ParseJob>(std::move(job));
  auto producer = [shared](apc::ProducerContext<ParseSnapshot, ParseInput>& ctx, ParseInput in) {
    const ParseJob& j = *shared;
    if (j.gate) {
      j.gate->started_run();
      // Runs before a reset is acknowledged, so a consumer never sees the
      // previous run's finish after the ack.
      ctx.on_reset([gate = j.gate] { gate->started_run(); });
    }
    struct Finish {
      StepGate* gate;
      ~Finish() {
        if (gate) gate->finished_run();
      }
    } finish{j.gate.get()};
    const auto feed = in.feed;
    ParseRun run(j, std::move(in));
    auto sink = [&](ParseSnapshot s) { ctx.set_result(std::move(s)); };
    for (;;) {
      const bool may_step = !j.gate || j.gate->arrive();
      if (ctx.check_status().kind != apc::Directive<ParseInput>::Kind::Continue) return;
      if (!may_step) continue;
      const std::uint64_t before = run.transactions();
      const auto p = run.advance(sink);
      if (p == ParseRun::Progress::Waiting) {
        // Idle until input arrives; keep answering the mailbox meanwhile.
        feed->wait(std::chrono::milliseconds(2));
        continue;
      }
      if (run.transactions() != before) {
        ctx.note_transaction();
        if (j.gate) j.gate->completed();
      }
      if (p == ParseRun::Progress::Done) return;
    }
  };
  return apc::start_process<ParseSnapshot, ParseInput>(std::move(producer), std::move(input));
}

// --- RPG

RpgReport measure_rpg(const std::vector<TransactionRecord>& log) {
  if (log.empty()) throw std::invalid_argument("measure_rpg on an empty transaction log");
  RpgReport r;
  r.bucket_bounds_ns = {1'000, 10'000, 100'000, 1'000'000, 10'000'000, 100'000'000};
  r.histogram.assign(r.bucket_bounds_ns.size() + 1, 0);
  std::map<std::string, std::int64_t> kind_total;
  std::int64_t max_ns = 0;
  for (const auto& rec : log) {
    r.total_ns += rec.duration_ns;
    max_ns = std::max(max_ns, rec.duration_ns);
    auto bucket = std::upper_bound(r.bucket_bounds_ns.begin(), r.bucket_bounds_ns.end(), rec.duration_ns);
    ++r.histogram[static_cast<std::size_t>(bucket - r.bucket_bounds_ns.begin())];
    const std::string kind = to_string(rec.kind);
    ++r.per_kind[kind].count;
    kind_total[kind] += rec.duration_ns;
  }
  r.count = log.size();
  const double n = static_cast<double>(r.count);
  const double total = static_cast<double>(r.total_ns);
  r.mean_ms = total / n / 1e6;
  r.max_ms = static_cast<double>(max_ns) / 1e6;
  // 500 ms / (total / n) with a single rounding step.
  r.expected_per_500ms = r.total_ns == 0 ? 0.0 : 500e6 * n / total;
  for (auto& [kind, s] : r.per_kind) {
    s.mean_ms = static_cast<double>(kind_total[kind]) / static_cast<double>(s.count) / 1e6;
  }
  return r;
}

std::string rpg_json(const RpgReport& r) {
  nlohmann::json j{{"count", r.count},
                   {"total_ns", r.total_ns},
                   {"mean_ms", r.mean_ms},
                   {"max_ms", r.max_ms},
                   {"expected_per_500ms", r.expected_per_500ms},
                   {"bucket_bounds_ns", r.bucket_bounds_ns},
                   {"histogram", r.histogram}};
  for (const auto& [kind, s] : r.per_kind) {
    j["per_kind"][kind] = {{"count", s.count}, {"mean_ms", s.mean_ms}};
  }
  return j.dump();
}

std::string rpg_text(const RpgReport& r) {
  std::ostringstream out;
  out << "transactions: " << r.count << "\n"
      << "mean: " << r.mean_ms << " ms, max: " << r.max_ms << " ms\n"
      << "expected snapshots per 500 ms: " << r.expected_per_500ms << "\n";
  for (const auto& [kind, s] : r.per_kind) {
    out << "  " << kind << ": " << s.count << " (mean " << s.mean_ms << " ms)\n";
  }
  out << "histogram:";
  for (std::size_t i = 0; i < r.histogram.size(); ++i) {
    out << ' ';
    if (i < r.bucket_bounds_ns.size()) out << "<" << r.bucket_bounds_ns[i] << "ns:";
    else out << ">=" << r.bucket_bounds_ns.back() << "ns:";
    out << r.histogram[i];
  }
  out << "\n";
  return out.str();
}

}  // namespace anyparse
