#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "cli.hpp"

namespace {

using namespace anyparse::cli;

void add_run_options(CLI::App& cmd, RunConfig& c) {
  cmd.add_option("-g,--grammar", c.grammar_files, "Grammar and lexicon files")->required();
  cmd.add_option("-l,--lattice", c.lattice, "Word lattice")->required();
  cmd.add_option("--poll", c.poll_interval, "Poll interval (trigger units)");
  cmd.add_option("--deadline", c.deadline, "Abort after this many trigger units");
  cmd.add_option("--trigger", c.trigger, "Unit of poll, deadline and script offsets")
      ->transform(CLI::CheckedTransformer(std::map<std::string, Trigger>{{"ms", Trigger::Ms}, {"tx", Trigger::Tx}}));
  cmd.add_option("--feed-interval", c.feed_interval_ms, "Milliseconds between hypothesis arrivals");
  cmd.add_option("--format", c.format, "Report format")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Format>{{"text", Format::Text}, {"json", Format::JsonLines}}));
  cmd.add_flag("--fs", c.with_fs, "Include feature structures in json reports");
  cmd.add_flag("--fragment-first", c.params.fragment_first, "Report fragments as soon as found");
  cmd.add_option("--publish-every", c.params.publish_every, "Transactions between publications");
  cmd.add_option("--start", c.params.start_category, "Start category");
  cmd.add_option("--beam", c.params.beam, "Maximum agenda size");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anytime chart parser for word lattices"};
  app.require_subcommand(1);

  RunConfig parse_config;
  auto* parse = app.add_subcommand("parse", "Parse a lattice");
  add_run_options(*parse, parse_config);
  parse->add_option("--mode", parse_config.mode, "batch or anytime")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Mode>{{"batch", Mode::Batch}, {"anytime", Mode::Anytime}}));
  parse->add_flag("--stop-when-good", parse_config.stop_when_good,
                  "Stop at the first complete consistent analysis");

  RunConfig replay_config;
  replay_config.mode = Mode::Anytime;
  std::string script_path;
  auto* replay = app.add_subcommand("replay", "Drive a producer with a consumer script");
  add_run_options(*replay, replay_config);
  replay->add_option("-s,--script", script_path, "Consumer script")->required();

  std::vector<std::string> check_files;
  auto* check = app.add_subcommand("check", "Validate grammar and lexicon files");
  check->add_option("files", check_files, "Grammar and lexicon files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  if (parse->parsed()) return cmd_parse(parse_config, std::cout, std::cerr);
  if (check->parsed()) return cmd_check(check_files, std::cout);
  try {
    const auto script = parse_script_file(script_path);
    return cmd_replay(script, replay_config, std::cout, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}
