#include "hazsim/decode/decoder.hpp"
#include "hazsim/scenario.hpp"
#include "hazsim/service/script.hpp"
#include "hazsim/service/server.hpp"
#include "hazsim/service/session.hpp"
#include "hazsim/sound/render.hpp"
#include "hazsim/sound/wav.hpp"
#include "hazsim/study.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace hazsim;
using nlohmann::json;

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

sound::SoundSet set_of(const std::string& s) {
  const auto v = sound::parse_sound_set(s);
  if (!v) throw CliError("unknown sound set '" + s + "' (cog, comp)");
  return *v;
}

HazardType hazard_of(const std::string& s) {
  const auto v = parse_hazard(s);
  if (!v) throw CliError("unknown hazard '" + s + "' (radiation, temperature, gas)");
  return *v;
}

// "t:level,t:level,..."
sound::LevelTrajectory parse_keyframes(const std::string& text) {
  std::vector<std::pair<double, double>> pts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw CliError("keyframe '" + item + "' is not t:level");
    try {
      pts.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
    } catch (const std::exception&) {
      throw CliError("keyframe '" + item + "' is not numeric");
    }
  }
  if (pts.empty()) throw CliError("no keyframes given");
  return sound::LevelTrajectory::keyframes(std::move(pts));
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string script, log, metrics, audio;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto script = service::load_script(a.script);
  const auto scenario = load_scenario(script.scenario);
  const auto result = service::run_script(script, scenario, !a.audio.empty());
  if (a.log.empty())
    std::cout << result.log;
  else
    write_text(a.log, result.log);
  if (!a.metrics.empty()) write_text(a.metrics, result.metrics.dump(2) + "\n");
  if (!a.audio.empty()) sound::write_wav(a.audio, *result.audio);
  return 0;
}

struct RenderArgs {
  std::string set, hazard, out, keyframes;
  std::optional<double> level;
  std::vector<double> gaussian;
  double duration = 2.0;
  std::uint64_t seed = 1;
  int sample_rate = sound::kDefaultSampleRate;
};

int cmd_render(const RenderArgs& a) {
  sound::RenderRequest req;
  req.set = set_of(a.set);
  req.hazard = hazard_of(a.hazard);
  req.duration = a.duration;
  req.seed = a.seed;
  req.sample_rate = a.sample_rate;
  const int given = int(a.level.has_value()) + int(!a.keyframes.empty()) + int(!a.gaussian.empty());
  if (given != 1) throw CliError("give exactly one of --level, --keyframes, --gaussian");
  if (a.level) {
    if (*a.level < 0.0 || *a.level > 1.0) throw CliError("--level must lie in [0, 1]");
    req.trajectory = sound::LevelTrajectory::constant(*a.level);
  } else if (!a.keyframes.empty()) {
    req.trajectory = parse_keyframes(a.keyframes);
  } else {
    if (a.gaussian.size() != 3) throw CliError("--gaussian takes mu sigma sweep_seconds");
    req.trajectory = sound::LevelTrajectory::gaussian_sweep(a.gaussian[0], a.gaussian[1], a.gaussian[2]);
  }
  const fs::path out = a.out;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  sound::write_wav(out, sound::render_trajectory(req));
  write_text(fs::path(out.string() + ".json"), sound::render_manifest(req, out.filename().string()).dump(2) + "\n");
  return 0;
}

struct StudyArgs {
  std::uint64_t seed = 7;
  int participants = 4;
  int trials = 3;
  double sigma = 0.35, sweep = 16.0;
  std::string out = "study_out", responses;
  bool stimuli = false;
};

int cmd_study(const StudyArgs& a) {
  const fs::path dir = a.out;
  fs::create_directories(dir);
  std::vector<study::TrialResponse> responses;
  json manifest;
  if (!a.responses.empty()) {
    responses = study::responses_from_csv(read_text(a.responses));
    manifest = {{"source", a.responses}};
  } else {
    study::StudyConfig cfg;
    cfg.trials_per_sound = a.trials;
    cfg.sigma = a.sigma;
    cfg.sweep_duration = a.sweep;
    const auto cohort = study::run_machine_cohort(a.seed, a.participants, cfg);
    responses = cohort.responses;
    json trials = json::array();
    for (std::size_t i = 0; i < cohort.trials.size(); ++i) {
      json t = study::to_json(cohort.trials[i]);
      t["participant"] = cohort.responses[i].participant;
      t["response"] = cohort.responses[i].response;
      trials.push_back(t);
      if (a.stimuli) {
        char name[64];
        std::snprintf(name, sizeof name, "%s_%02d.wav", cohort.responses[i].participant.c_str(), cohort.trials[i].index);
        const fs::path wav = dir / "stimuli" / name;
        fs::create_directories(wav.parent_path());
        sound::write_wav(wav, study::run_trial(cohort.trials[i]).audio);
      }
    }
    manifest = {{"seed", a.seed},
                {"participants", a.participants},
                {"trials_per_sound", a.trials},
                {"sigma", a.sigma},
                {"sweep_duration", a.sweep},
                {"position_track", "position(t) = -1 + 4t/T for t <= T/2, 3 - 4t/T after"},
                {"trials", trials}};
  }
  const auto table = study::score(responses);
  write_text(dir / "trials.json", manifest.dump(2) + "\n");
  write_text(dir / "responses.csv", study::responses_csv(responses));
  write_text(dir / "participants.csv", study::participants_csv(table));
  write_text(dir / "score.csv", study::score_csv(table));
  std::cout << study::score_csv(table);
  if (!table.removed.empty()) {
    std::cout << "removed:";
    for (const auto& p : table.removed) std::cout << " " << p;
    std::cout << "\n";
  }
  return 0;
}

struct ServeArgs {
  std::string scenario, set = "cog", host = "127.0.0.1";
  std::optional<int> port;
  double tick_rate = 20.0;
  std::uint64_t seed = 1;
};

service::Server* g_server = nullptr;

int cmd_serve(const ServeArgs& a) {
  const auto scenario = load_scenario(a.scenario);
  service::SessionConfig sc;
  sc.tick_rate = a.tick_rate;
  sc.seed = a.seed;
  service::Session session(scenario, set_of(a.set), sc);
  service::ServerConfig cfg;
  cfg.host = a.host;
  cfg.port = a.port ? static_cast<unsigned short>(*a.port) : service::default_port();
  service::Server server(session, cfg);
  g_server = &server;
  std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
  std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
  std::cerr << "serving " << scenario.name << " on ws://" << cfg.host << ":" << server.port() << " at " << a.tick_rate
            << " ticks/s\n";
  server.run();
  g_server = nullptr;
  return 0;
}

int cmd_validate(const std::vector<std::string>& files) {
  int errors = 0;
  for (const auto& f : files) {
    json j;
    try {
      j = json::parse(read_text(f));
    } catch (const json::exception& e) {
      std::cout << f << ": error: " << e.what() << "\n";
      ++errors;
      continue;
    }
    const auto issues = validate_scenario(j);
    int file_errors = 0;
    for (const auto& i : issues) {
      const bool err = i.severity == ValidationIssue::Severity::Error;
      file_errors += err;
      std::cout << f << ": " << (err ? "error" : "warning") << ": " << i.where << ": " << i.message << "\n";
    }
    if (!file_errors) std::cout << f << ": ok\n";
    errors += file_errors;
  }
  return errors ? 1 : 0;
}

struct DecodeArgs {
  std::vector<std::string> files;
  std::string set, hazard;
};

int cmd_decode(const DecodeArgs& a) {
  std::cout << "file,set,hazard,feature,value,unit,confidence,level\n";
  int failures = 0;
  for (const auto& f : a.files) {
    std::string set = a.set, hazard = a.hazard;
    const fs::path side = f + ".json";
    if ((set.empty() || hazard.empty()) && fs::exists(side)) {
      const auto m = json::parse(read_text(side));
      if (set.empty()) set = m.value("set", "");
      if (hazard.empty()) hazard = m.value("hazard", "");
    }
    if (set.empty() || hazard.empty()) throw CliError(f + ": give --set and --hazard or keep the .json manifest alongside");
    const auto s = set_of(set);
    const auto h = hazard_of(hazard);
    try {
      const auto est = decode::invert_level(s, h, sound::read_wav(f));
      char line[256];
      std::snprintf(line, sizeof line, ",%s,%s,%s,%.6f,%s,%.4f,%.4f\n", set.c_str(), std::string(to_string(h)).c_str(),
                    std::string(sound::to_string(est.feature.kind)).c_str(), est.feature.value,
                    std::string(est.feature.unit()).c_str(), est.feature.confidence, est.level);
      std::cout << f << line;
    } catch (const decode::NoSignal& e) {
      std::cout << f << "," << set << "," << to_string(h) << ",,,,0,\n";
      std::cerr << f << ": " << e.what() << "\n";
      ++failures;
    }
  }
  return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot hazard simulator and sonification toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Headless scripted run: event log (JSON lines) and metrics");
  s->add_option("--script", sim.script, "Script JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--log", sim.log, "Event log path (default stdout)");
  s->add_option("--metrics", sim.metrics, "Metrics JSON path");
  s->add_option("--audio", sim.audio, "Write the session mix to a WAV file");

  RenderArgs ren;
  auto* r = app.add_subcommand("render", "Render one RTL voice along a level trajectory");
  r->add_option("--set", ren.set, "cog or comp")->required();
  r->add_option("--hazard", ren.hazard, "radiation, temperature or gas")->required();
  r->add_option("--level", ren.level, "Constant level in [0, 1]");
  r->add_option("--keyframes", ren.keyframes, "Piecewise-linear levels, \"t:level,t:level,...\"");
  r->add_option("--gaussian", ren.gaussian, "Hidden-Gaussian sweep: mu sigma sweep_seconds")->expected(3);
  r->add_option("--dur", ren.duration, "Duration in seconds")->check(CLI::PositiveNumber);
  r->add_option("--seed", ren.seed, "Noise seed");
  r->add_option("--rate", ren.sample_rate, "Sample rate")->check(CLI::Range(8000, 192000));
  r->add_option("--out", ren.out, "Output WAV (manifest written alongside as .json)")->required();

  StudyArgs st;
  auto* y = app.add_subcommand("study", "Machine-run evaluation study: trials, stimuli, responses, error table");
  y->add_option("--seed", st.seed, "Trial seed");
  y->add_option("--participants", st.participants, "Machine participants")->check(CLI::Range(1, 1000));
  y->add_option("--trials", st.trials, "Trials per sound")->check(CLI::Range(1, 100));
  y->add_option("--sigma", st.sigma, "Gaussian width (position units)")->check(CLI::PositiveNumber);
  y->add_option("--sweep", st.sweep, "Sweep duration in seconds")->check(CLI::PositiveNumber);
  y->add_option("--out", st.out, "Output directory");
  y->add_option("--responses", st.responses, "Score an existing responses CSV instead")->check(CLI::ExistingFile);
  y->add_flag("--stimuli", st.stimuli, "Also write stimulus WAVs");

  ServeArgs sv;
  auto* v = app.add_subcommand("serve", "Run a live session over WebSocket");
  v->add_option("--scenario", sv.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  v->add_option("--set", sv.set, "cog or comp");
  v->add_option("--host", sv.host, "Bind address");
  v->add_option("--port", sv.port, "Port (default $HAZSIM_PORT or 8765)")->check(CLI::Range(0, 65535));
  v->add_option("--tick-rate", sv.tick_rate, "Simulation ticks per second")->check(CLI::PositiveNumber);
  v->add_option("--seed", sv.seed, "Audio seed");

  std::vector<std::string> lint;
  auto* l = app.add_subcommand("validate", "Lint scenario files");
  l->add_option("files", lint, "Scenario JSON files")->required()->check(CLI::ExistingFile);

  DecodeArgs dec;
  auto* d = app.add_subcommand("decode", "Estimate RTL levels from WAV files (CSV to stdout)");
  d->add_option("files", dec.files, "WAV files")->required()->check(CLI::ExistingFile);
  d->add_option("--set", dec.set, "cog or comp (default from manifest)");
  d->add_option("--hazard", dec.hazard, "Hazard (default from manifest)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s) return cmd_simulate(sim);
    if (*r) return cmd_render(ren);
    if (*y) return cmd_study(st);
    if (*v) return cmd_serve(sv);
    if (*l) return cmd_validate(lint);
    if (*d) return cmd_decode(dec);
  } catch (const std::exception& e) {
    std::cerr << "hazsim: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
