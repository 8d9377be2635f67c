#include "cli.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "anyparse/anytime_parser.hpp"
#include "anyparse/grammar.hpp"
#include "anyparse/lattice.hpp"

namespace anyparse::cli {

using Json = nlohmann::json;
using SteadyClock = std::chrono::steady_clock;

void RunConfig::validate() const {
  if (grammar_files.empty()) throw ConfigError("no grammar file given");
  if (mode == Mode::Anytime && poll_interval < 1) throw ConfigError("poll interval must be at least 1");
  if (trigger == Trigger::Tx && feed_interval_ms > 0) {
    throw ConfigError("a feed interval needs wall-clock triggers");
  }
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<ScriptAction> parse_script(std::istream& in, const std::string& base_dir) {
  std::vector<ScriptAction> out;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream words(raw);
    std::string verb;
    if (!(words >> verb)) continue;
    auto fail = [&](const std::string& why) {
      return ConfigError("script line " + std::to_string(line) + ": " + why);
    };
    ScriptAction a;
    a.line = line;
    if (verb == "poll") a.kind = ScriptAction::Kind::Poll;
    else if (verb == "abort") a.kind = ScriptAction::Kind::Abort;
    else if (verb == "reset") a.kind = ScriptAction::Kind::Reset;
    else throw fail("unknown action '" + verb + "'");
    std::string at;
    if (!(words >> at)) throw fail("missing offset");
    try {
      std::size_t used = 0;
      if (at.empty() || at[0] == '-') throw std::invalid_argument(at);
      a.at = std::stoull(at, &used);
      if (used != at.size()) throw std::invalid_argument(at);
    } catch (const std::exception&) {
      throw fail("bad offset '" + at + "'");
    }
    if (a.kind == ScriptAction::Kind::Reset) {
      if (!(words >> a.lattice)) throw fail("reset without a lattice");
      std::filesystem::path p(a.lattice);
      if (p.is_relative() && !base_dir.empty()) a.lattice = (std::filesystem::path(base_dir) / p).string();
    }
    std::string extra;
    if (words >> extra) throw fail("unexpected '" + extra + "'");
    if (!out.empty() && a.at < out.back().at) throw fail("offsets must not decrease");
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<ScriptAction> parse_script_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read script " + path);
  return parse_script(in, std::filesystem::path(path).parent_path().string());
}

namespace {

struct Prepared {
  std::shared_ptr<const Grammar> grammar;
  std::shared_ptr<const Lexicon> lexicon;
  std::vector<WordHypothesis> hypotheses;
};

// Returns kOk or the exit code to stop with.
int load_grammar(const RunConfig& config, Prepared& p, std::ostream& err) {
  LoadResult r = load_grammar_files(config.grammar_files);
  for (const auto& d : r.diagnostics) err << d.to_string() << "\n";
  if (!r.ok()) return kLoadError;
  const Category& start = config.params.start_category;
  if (!r.grammar.has_lhs(start) && !r.lexicon.has_category(start)) {
    err << "start category " << start << " is not produced by the grammar\n";
    return kConfigError;
  }
  p.grammar = std::make_shared<const Grammar>(std::move(r.grammar));
  p.lexicon = std::make_shared<const Lexicon>(std::move(r.lexicon));
  return kOk;
}

int load_lattice(const std::string& path, std::vector<WordHypothesis>& into, std::ostream& err) {
  try {
    into = read_lattice_file(path);
    return kOk;
  } catch (const LatticeError& e) {
    err << path << ":" << e.what() << "\n";
  } catch (const std::exception& e) {
    err << path << ": " << e.what() << "\n";
  }
  return kLoadError;
}

bool good_enough(const ParseSnapshot& s) {
  for (const auto& a : s.analyses) {
    if (a->complete && a->status != AnalysisStatus::Inconsistent) return true;
  }
  return false;
}

class Reporter {
 public:
  Reporter(const RunConfig& c, std::ostream& out) : c_(c), out_(out) {}

  void snapshot(const std::string& event, std::optional<std::uint64_t> at,
                const apc::Envelope<ParseSnapshot>& e) {
    if (c_.format == Format::JsonLines) {
      Json j = e.is_void() ? Json::object() : Json::parse(snapshot_json(*e.payload, c_.with_fs));
      j["event"] = event;
      j["version"] = e.version;
      j["void"] = e.is_void();
      if (at) j["at"] = *at;
      out_ << j.dump() << "\n";
      return;
    }
    out_ << event;
    if (at) out_ << " at=" << *at;
    out_ << " v" << e.version;
    if (e.is_void()) {
      out_ << " void\n";
      return;
    }
    const ParseSnapshot& s = *e.payload;
    out_ << " run=" << s.run_id << " tx=" << s.transactions_executed
         << " consumed=" << s.input_consumed << " coverage=" << s.coverage
         << " readings=" << s.readings << " analyses=" << s.analyses.size()
         << (s.finalized ? " finalized" : "") << "\n";
    body(s, "  ");
  }

  // The batch forest: one header line, then one line per analysis.
  void forest(const ParseSnapshot& s) {
    if (c_.format == Format::JsonLines) {
      Json j = Json::parse(snapshot_json(s, c_.with_fs));
      j["event"] = "final";
      out_ << j.dump() << "\n";
      return;
    }
    out_ << "# transactions=" << s.transactions_executed << " coverage=" << s.coverage
         << " readings=" << s.readings << " analyses=" << s.analyses.size() << "\n";
    body(s, "");
  }

  void event(const std::string& name, std::uint64_t at, const Json& fields) {
    if (c_.format == Format::JsonLines) {
      Json j = fields;
      j["event"] = name;
      j["at"] = at;
      out_ << j.dump() << "\n";
      return;
    }
    out_ << name << " at=" << at;
    for (const auto& [k, v] : fields.items()) {
      out_ << " " << k << "=" << (v.is_string() ? v.get<std::string>() : v.dump());
    }
    out_ << "\n";
  }

  void transaction(const TransactionRecord& r) {
    const bool timing = c_.trigger == Trigger::Ms;
    if (c_.format == Format::JsonLines) {
      Json j = Json::parse(record_json(r, timing));
      j["event"] = "tx";
      out_ << j.dump() << "\n";
      return;
    }
    out_ << "tx run=" << r.run << " seq=" << r.seq << " " << to_string(r.kind)
         << " edges=" << r.edges_added << " failures=" << r.failures;
    if (timing) out_ << " ns=" << r.duration_ns;
    if (r.published) out_ << " published analyses=" << r.analyses;
    out_ << "\n";
  }

  // Durations are wall-clock, so under transaction triggers they go to the
  // log stream and the report stays reproducible.
  void rpg(const std::vector<TransactionRecord>& log, std::ostream& err) {
    std::ostream& to = c_.trigger == Trigger::Ms ? out_ : err;
    if (log.empty()) {
      to << (c_.format == Format::JsonLines ? R"({"event":"rpg","count":0})" : "no transactions")
         << "\n";
      return;
    }
    const RpgReport r = measure_rpg(log);
    if (c_.format == Format::JsonLines) {
      Json j = Json::parse(rpg_json(r));
      j["event"] = "rpg";
      to << j.dump() << "\n";
    } else {
      to << rpg_text(r);
    }
  }

 private:
  void body(const ParseSnapshot& s, const std::string& indent) {
    std::istringstream lines(render_forest(s, c_.params.start_category));
    for (std::string l; std::getline(lines, l);) out_ << indent << l << "\n";
    if (c_.params.fragment_first && !s.cover.empty()) {
      out_ << indent << "cover:";
      for (const auto& p : s.cover) out_ << " " << p.category << " " << p.from << "-" << p.to;
      out_ << "\n";
    }
  }

  const RunConfig& c_;
  std::ostream& out_;
};

// Producer plus the optional thread that trickles hypotheses into it.
class Session {
 public:
  Session(const RunConfig& c, const Prepared& p) : config_(c) {
    job_.grammar = p.grammar;
    job_.lexicon = p.lexicon;
    job_.params = c.params;
    job_.log = std::make_shared<TransactionLog>();
    job_.gate = std::make_shared<StepGate>();
    start_ = SteadyClock::now();
    ParseInput input;
    if (c.feed_interval_ms > 0) {
      input.feed = std::make_shared<HypothesisFeed>();
      feeder_ = std::thread([this, feed = input.feed, hyps = p.hypotheses] {
        for (const auto& h : hyps) {
          if (stop_feeding_) break;
          feed->push(h);
          std::this_thread::sleep_for(std::chrono::milliseconds(config_.feed_interval_ms));
        }
        feed->close();
      });
    } else {
      input.hypotheses = p.hypotheses;
    }
    handle_ = start_parse(job_, std::move(input));
  }

  ~Session() {
    stop_feeding_ = true;
    if (feeder_.joinable()) feeder_.join();
    gate().release();
    handle_.abort().wait();
  }

  ParseProcess& handle() { return handle_; }
  StepGate& gate() { return *job_.gate; }
  const TransactionLog& log() const { return *job_.log; }

  /// Blocks until `at` in the configured unit.  Under transaction triggers
  /// the producer is then parked at the gate or done; returns false when
  /// the current run is done.
  bool reach(std::uint64_t at) {
    if (config_.trigger == Trigger::Tx) {
      gate().allow_until(at);
      gate().wait_completed(at);
      gate().wait_blocked();
      return !gate().finished();
    }
    std::this_thread::sleep_until(start_ + std::chrono::milliseconds(at));
    return true;
  }

  std::uint64_t elapsed_ms() const {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(SteadyClock::now() - start_).count());
  }

  apc::Acknowledgement abort() {
    auto ack = handle_.abort();
    gate().release();
    return ack.get();
  }

  void wait_idle() {
    gate().release();
    handle_.wait_status([](apc::Status s) { return s != apc::Status::Running && s != apc::Status::Resetting; },
                        std::chrono::hours(24));
  }

 private:
  const RunConfig& config_;
  ParseJob job_;
  ParseProcess handle_;
  SteadyClock::time_point start_;
  std::atomic<bool> stop_feeding_{false};
  std::thread feeder_;
};

int run_anytime(const RunConfig& c, const Prepared& p, std::ostream& out, std::ostream& err) {
  Reporter report(c, out);
  Session session(c, p);
  auto& h = session.handle();

  if (c.deadline && *c.deadline == 0) {
    // Nothing may run before the deadline, so the slot still holds its preset.
    const auto e = h.get_result();
    report.snapshot("snapshot", 0, e);
    session.abort();
    report.event("end", 0, {{"result", e.is_void() ? "void" : "partial"}, {"reason", "deadline"}});
    return e.is_void() ? kVoidAtDeadline : kOk;
  }
  if (c.trigger == Trigger::Ms) session.gate().release();

  std::uint64_t printed = 0;
  apc::Envelope<ParseSnapshot> last;
  std::string reason = "quiescent";
  for (std::uint64_t t = c.poll_interval;; t += c.poll_interval) {
    if (c.deadline && t > *c.deadline) t = *c.deadline;
    const bool running = session.reach(t);
    const auto status = h.status();
    last = h.get_result();
    const std::uint64_t at = c.trigger == Trigger::Tx ? t : session.elapsed_ms();
    if (last.version != printed) {
      report.snapshot("snapshot", at, last);
      printed = last.version;
    }
    const bool finished = c.trigger == Trigger::Tx ? !running : status != apc::Status::Running;
    if (c.deadline && t >= *c.deadline && !finished) {
      reason = "deadline";
      break;
    }
    if (c.stop_when_good && !last.is_void() && good_enough(*last.payload)) {
      reason = "good-enough";
      break;
    }
    if (finished) break;
  }
  if (reason != "quiescent") session.abort();
  const std::uint64_t end_at = c.trigger == Trigger::Tx ? session.gate().completed_count() : session.elapsed_ms();
  const char* result = last.is_void() ? "void" : last.payload->finalized ? "final" : "partial";
  report.event("end", end_at, {{"result", result}, {"reason", reason}});
  report.rpg(session.log().records(), err);
  return reason == "deadline" && last.is_void() ? kVoidAtDeadline : kOk;
}

}  // namespace

int cmd_parse(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.validate();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  Prepared p;
  if (int code = load_grammar(config, p, err)) return code;
  if (int code = load_lattice(config.lattice, p.hypotheses, err)) return code;

  if (config.mode == Mode::Batch) {
    ParseJob job;
    job.grammar = p.grammar;
    job.lexicon = p.lexicon;
    job.params = config.params;
    const auto r = run_batch(job, {p.hypotheses, nullptr});
    Reporter(config, out).forest(r.final_snapshot);
    return kOk;
  }
  return run_anytime(config, p, out, err);
}

int cmd_replay(const std::vector<ScriptAction>& script, const RunConfig& config, std::ostream& out,
               std::ostream& err) {
  try {
    config.validate();
    for (std::size_t i = 1; i < script.size(); ++i) {
      if (script[i].at < script[i - 1].at) throw ConfigError("script offsets must not decrease");
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  Prepared p;
  if (int code = load_grammar(config, p, err)) return code;
  if (int code = load_lattice(config.lattice, p.hypotheses, err)) return code;
  std::vector<std::vector<WordHypothesis>> reset_inputs(script.size());
  for (std::size_t i = 0; i < script.size(); ++i) {
    if (script[i].kind != ScriptAction::Kind::Reset) continue;
    if (int code = load_lattice(script[i].lattice, reset_inputs[i], err)) return code;
  }

  Reporter report(config, out);
  Session session(config, p);
  auto& h = session.handle();
  if (config.trigger == Trigger::Ms) session.gate().release();
  bool aborted = false;
  for (std::size_t i = 0; i < script.size(); ++i) {
    const ScriptAction& a = script[i];
    session.reach(a.at);
    switch (a.kind) {
      case ScriptAction::Kind::Poll:
        report.snapshot("poll", a.at, h.get_result());
        break;
      case ScriptAction::Kind::Abort: {
        const auto ack = session.abort();
        aborted = true;
        report.event("abort", a.at,
                     {{"tx_at_enqueue", ack.transactions_at_enqueue},
                      {"tx_at_effect", ack.transactions_at_effect},
                      {"tx_after_abort", ack.transactions_at_effect - ack.transactions_at_enqueue}});
        break;
      }
      case ScriptAction::Kind::Reset:
        try {
          auto ack = h.reset({reset_inputs[i], nullptr});
          session.gate().nudge();
          const auto got = ack.get();
          report.event("reset", a.at, {{"lattice", a.lattice}, {"tx_at_effect", got.transactions_at_effect}});
        } catch (const apc::ProcessAborted& e) {
          report.event("reset", a.at, {{"lattice", a.lattice}, {"rejected", e.what()}});
        }
        break;
    }
  }
  if (!aborted) {
    session.wait_idle();
    report.snapshot("final", std::nullopt, h.get_result());
  }
  for (const auto& r : session.log().records()) report.transaction(r);
  return kOk;
}

int cmd_check(const std::vector<std::string>& grammar_files, std::ostream& out) {
  const LoadResult r = load_grammar_files(grammar_files);
  std::size_t errors = 0, warnings = 0;
  for (const auto& d : r.diagnostics) {
    out << d.to_string() << "\n";
    (d.severity == Diagnostic::Severity::Error ? errors : warnings) += 1;
  }
  out << r.grammar.rules().size() << " rules, " << r.lexicon.entries().size() << " lexical entries, "
      << errors << " errors, " << warnings << " warnings\n";
  return errors == 0 ? kOk : kCheckFailed;
}

}  // namespace anyparse::cli
