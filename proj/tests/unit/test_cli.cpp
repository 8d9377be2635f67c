#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "derivation_oracle.hpp"
#include "parser_support.hpp"

namespace anyparse::cli {
namespace {

using Json = nlohmann::json;

std::string fixture(const std::string& name) { return std::string(ANYPARSE_FIXTURES) + "/" + name; }

RunConfig toy(const std::string& lattice) {
  RunConfig c;
  c.grammar_files = {fixture("toy.grammar"), fixture("toy.lexicon")};
  c.lattice = fixture(lattice);
  return c;
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome parse(const RunConfig& c) {
  std::ostringstream out, err;
  const int code = cmd_parse(c, out, err);
  return {code, out.str(), err.str()};
}

Outcome replay(const std::string& script, const RunConfig& c) {
  std::istringstream in(script);
  std::ostringstream out, err;
  const int code = cmd_replay(parse_script(in, ANYPARSE_FIXTURES), c, out, err);
  return {code, out.str(), err.str()};
}

std::vector<Json> json_lines(const std::string& text) {
  std::vector<Json> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(Json::parse(l));
  return out;
}

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("anyparse_cli_" + name);
  std::ofstream(path) << content;
  return path.string();
}

// Run ids come from a process-wide counter.
std::string without_run_ids(const std::string& s) {
  return std::regex_replace(s, std::regex(R"((run=|"run":)\d+)"), "$1#");
}

// --- scripts

TEST(Script, ParsesActions) {
  std::istringstream in("poll 10\n# comment\n\nabort 20  # trailing\nreset 20 b.lattice\n");
  const auto s = parse_script(in, "/base");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].kind, ScriptAction::Kind::Poll);
  EXPECT_EQ(s[1].at, 20u);
  EXPECT_EQ(s[2].kind, ScriptAction::Kind::Reset);
  EXPECT_EQ(s[2].lattice, "/base/b.lattice");
  EXPECT_EQ(s[2].line, 5);
}

TEST(Script, Rejections) {
  for (const char* bad : {"reset 5\n", "poll 10\npoll 5\n", "jump 1\n", "poll -1\n", "poll 1x\n",
                          "poll\n", "abort 3 now\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(parse_script(in), ConfigError) << bad;
  }
}

// --- check

TEST(Check, CleanFixture) {
  std::ostringstream out;
  EXPECT_EQ(cmd_check({fixture("toy.grammar"), fixture("toy.lexicon")}, out), kOk);
  EXPECT_NE(out.str().find("0 errors"), std::string::npos);
}

TEST(Check, ConstituentIndexOutOfRange) {
  const auto g = temp_file("index.grammar", "Rule S -> NP VP\n  <3 agr> = <1 agr>\nLex a NP\nLex b VP\n");
  std::ostringstream out;
  EXPECT_EQ(cmd_check({g}, out), kCheckFailed);
  EXPECT_NE(out.str().find(":2: error: constituent index 3"), std::string::npos) << out.str();
}

TEST(Check, DuplicateRuleOnlyWarns) {
  const auto g = temp_file("dup.grammar", "Rule S -> NP VP\nRule S -> NP VP\nLex a NP\nLex b VP\n");
  std::ostringstream out;
  EXPECT_EQ(cmd_check({g}, out), kOk);
  EXPECT_NE(out.str().find("warning"), std::string::npos);
}

TEST(Check, CyclicLiteral) {
  const auto g = temp_file("cyc.grammar", "Rule S -> NP VP\nLex a NP\n  <f> = #1[g: #1]\nLex b VP\n");
  std::ostringstream out;
  EXPECT_EQ(cmd_check({g}, out), kCheckFailed);
  EXPECT_NE(out.str().find("cyclic"), std::string::npos);
}

// --- parse

TEST(Parse, BatchForestIsDeterministicAndComplete) {
  const auto a = parse(toy("telescope.lattice"));
  const auto b = parse(toy("telescope.lattice"));
  ASSERT_EQ(a.code, kOk) << a.err;
  EXPECT_EQ(a.out, b.out);

  auto l = oracle::load_or_throw(load_grammar_files({fixture("toy.grammar"), fixture("toy.lexicon")}));
  const auto hyps = read_lattice_file(fixture("telescope.lattice"));
  oracle::EagerEnumerator en(*l.grammar, *l.lexicon, hyps);
  std::size_t complete = 0;
  std::istringstream in(a.out);
  for (std::string line; std::getline(in, line);) {
    if (line.find("\tcomplete\t") == std::string::npos) continue;
    ++complete;
    bool known = false;
    for (const auto& it : en.items("S", 0, 8)) known |= line.find(it.derivation) != std::string::npos;
    EXPECT_TRUE(known) << line;
  }
  EXPECT_EQ(complete, en.items("S", 0, 8).size());
}

TEST(Parse, DeadlineZeroIsVoid) {
  for (Trigger t : {Trigger::Ms, Trigger::Tx}) {
    auto c = toy("simple.lattice");
    c.mode = Mode::Anytime;
    c.trigger = t;
    c.deadline = 0;
    const auto r = parse(c);
    EXPECT_EQ(r.code, kVoidAtDeadline);
    EXPECT_NE(r.out.find("void"), std::string::npos);
  }
}

TEST(Parse, DeadlineAfterFirstPublicationIsNotVoid) {
  auto c = toy("telescope.lattice");
  c.mode = Mode::Anytime;
  c.trigger = Trigger::Tx;
  c.deadline = 7;
  c.format = Format::JsonLines;
  const auto r = parse(c);
  EXPECT_EQ(r.code, kOk);
  const auto lines = json_lines(r.out);
  EXPECT_EQ(lines.back()["reason"], "deadline");
  EXPECT_EQ(lines.back()["result"], "partial");
  EXPECT_EQ(lines.back()["at"], 7);
}

TEST(Parse, TransactionTriggersAreReproducible) {
  auto c = toy("speech.lattice");
  c.mode = Mode::Anytime;
  c.trigger = Trigger::Tx;
  c.poll_interval = 3;
  c.format = Format::JsonLines;
  const auto a = parse(c);
  const auto b = parse(c);
  ASSERT_EQ(a.code, kOk);
  EXPECT_EQ(without_run_ids(a.out), without_run_ids(b.out));
  c.format = Format::Text;
  EXPECT_EQ(without_run_ids(parse(c).out), without_run_ids(parse(c).out));
}

TEST(Parse, AnytimeConvergesToBatch) {
  for (Trigger t : {Trigger::Ms, Trigger::Tx}) {
    auto c = toy("telescope.lattice");
    c.format = Format::JsonLines;
    const auto batch = json_lines(parse(c).out);
    c.mode = Mode::Anytime;
    c.trigger = t;
    c.poll_interval = 1;
    const auto any = json_lines(parse(c).out);
    Json last;
    for (const auto& j : any) {
      if (j["event"] == "snapshot") last = j;
    }
    ASSERT_FALSE(last.is_null());
    EXPECT_TRUE(last["finalized"].get<bool>());
    EXPECT_EQ(last["analyses"].dump(), batch.back()["analyses"].dump());
  }
}

TEST(Parse, IncrementalFeedConverges) {
  auto c = toy("telescope.lattice");
  c.format = Format::JsonLines;
  const auto batch = json_lines(parse(c).out);
  c.mode = Mode::Anytime;
  c.poll_interval = 1;
  c.feed_interval_ms = 1;
  const auto any = json_lines(parse(c).out);
  Json last;
  for (const auto& j : any) {
    if (j["event"] == "snapshot") last = j;
  }
  // Arrival order changes chart construction order, hence edge ids.
  auto strip = [](Json analyses) {
    for (auto& a : analyses) a.erase("edge");
    return analyses.dump();
  };
  EXPECT_EQ(strip(last["analyses"]), strip(batch.back()["analyses"]));
}

TEST(Parse, StopWhenGood) {
  auto c = toy("telescope.lattice");
  c.mode = Mode::Anytime;
  c.trigger = Trigger::Tx;
  c.poll_interval = 1;
  c.stop_when_good = true;
  c.format = Format::JsonLines;
  const auto lines = json_lines(parse(c).out);
  EXPECT_EQ(lines.back()["reason"], "good-enough");
}

TEST(Parse, LoadErrors) {
  const auto g = temp_file("broken.grammar", "Rule S -> NP VP\n  <1 agr = <2 agr>\n");
  RunConfig c;
  c.grammar_files = {g};
  c.lattice = fixture("simple.lattice");
  auto r = parse(c);
  EXPECT_EQ(r.code, kLoadError);
  EXPECT_NE(r.err.find(":2:"), std::string::npos) << r.err;

  auto l = toy("missing.lattice");
  EXPECT_EQ(parse(l).code, kLoadError);

  const auto bad_lattice = temp_file("bad.lattice", "the\t0\t1\t1.0\ndog\t1\tx\t1.0\n");
  l.lattice = bad_lattice;
  r = parse(l);
  EXPECT_EQ(r.code, kLoadError);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST(Parse, ConfigErrors) {
  auto c = toy("simple.lattice");
  c.mode = Mode::Anytime;
  c.poll_interval = 0;
  EXPECT_EQ(parse(c).code, kConfigError);
  c = toy("simple.lattice");
  c.params.publish_every = 0;
  EXPECT_EQ(parse(c).code, kConfigError);
  c = toy("simple.lattice");
  c.trigger = Trigger::Tx;
  c.feed_interval_ms = 5;
  EXPECT_EQ(parse(c).code, kConfigError);
  c = toy("simple.lattice");
  c.params.start_category = "Utterance";
  EXPECT_EQ(parse(c).code, kConfigError);
}

// --- replay

TEST(Replay, AbortBound) {
  auto c = toy("telescope.lattice");
  c.trigger = Trigger::Tx;
  c.format = Format::JsonLines;
  const auto r = replay("poll 10\nabort 20\n", c);
  ASSERT_EQ(r.code, kOk);
  const auto lines = json_lines(r.out);
  std::size_t txs = 0;
  Json abort;
  for (const auto& j : lines) {
    if (j["event"] == "abort") abort = j;
    if (j["event"] == "tx") ++txs;
  }
  ASSERT_FALSE(abort.is_null());
  EXPECT_LE(abort["tx_after_abort"].get<int>(), 1);
  EXPECT_EQ(txs, abort["tx_at_effect"].get<std::size_t>());
  EXPECT_EQ(txs, 20u);
}

TEST(Replay, WallClockAbortBound) {
  auto c = toy("speech.lattice");
  c.format = Format::JsonLines;
  const auto lines = json_lines(replay("poll 1\nabort 2\n", c).out);
  for (const auto& j : lines) {
    if (j["event"] == "abort") EXPECT_LE(j["tx_after_abort"].get<int>(), 1);
  }
}

TEST(Replay, ResetSwitchesInput) {
  auto c = toy("telescope.lattice");
  c.trigger = Trigger::Tx;
  c.format = Format::JsonLines;
  const auto lines = json_lines(replay("poll 10\nreset 15 simple.lattice\npoll 30\n", c).out);
  bool after_reset = false;
  std::optional<std::uint64_t> first_run;
  for (const auto& j : lines) {
    if (j["event"] == "reset") {
      after_reset = true;
      continue;
    }
    if (j["event"] != "poll" && j["event"] != "final") continue;
    if (!first_run) first_run = j["run"].get<std::uint64_t>();
    if (!after_reset) continue;
    EXPECT_NE(j["run"].get<std::uint64_t>(), *first_run);
    for (const auto& a : j["analyses"]) {
      const auto d = a["derivation"].get<std::string>();
      for (const char* w : {"man", "telescope", "with"}) EXPECT_EQ(d.find(w), std::string::npos) << d;
    }
  }
  EXPECT_TRUE(after_reset);
}

TEST(Replay, EmptyScriptReportsFinalOnly) {
  auto c = toy("simple.lattice");
  c.trigger = Trigger::Tx;
  c.format = Format::JsonLines;
  const auto lines = json_lines(replay("", c).out);
  std::size_t consumer_events = 0;
  for (const auto& j : lines) {
    if (j["event"] == "tx") continue;
    ++consumer_events;
    EXPECT_EQ(j["event"], "final");
    EXPECT_TRUE(j["finalized"].get<bool>());
  }
  EXPECT_EQ(consumer_events, 1u);
}

TEST(Replay, ResetAfterAbortRejected) {
  auto c = toy("simple.lattice");
  c.trigger = Trigger::Tx;
  c.format = Format::JsonLines;
  const auto lines = json_lines(replay("abort 2\nreset 3 simple.lattice\n", c).out);
  bool rejected = false;
  for (const auto& j : lines) rejected |= j["event"] == "reset" && j.contains("rejected");
  EXPECT_TRUE(rejected);
}

TEST(Replay, ReproducibleUnderTransactionTriggers) {
  auto c = toy("telescope.lattice");
  c.trigger = Trigger::Tx;
  const std::string script = "poll 3\npoll 9\nreset 12 speech.lattice\npoll 40\n";
  EXPECT_EQ(without_run_ids(replay(script, c).out), without_run_ids(replay(script, c).out));
}

}  // namespace
}  // namespace anyparse::cli
