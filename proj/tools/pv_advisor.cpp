// pv_advisor: train the DQN advisor, query it, export reports and serve the HTTP API.
//
// Exit codes: 0 success, 1 unexpected failure, 2 config/input/checkpoint error,
// 3 training diverged, 4 serve port unavailable.

#include <csignal>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

// Project headers (and Eigen) must precede httplib, whose <resolv.h> defines a `_res` macro.
#include "pvdqn/advisor.hpp"
#include "pvdqn/config.hpp"
#include "pvdqn/error.hpp"
#include "pvdqn/report.hpp"
#include "pvdqn/trainer.hpp"

#include <CLI11.hpp>
#include <httplib.h>

namespace fs = std::filesystem;
using namespace pvdqn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitPort = 4;

httplib::Server* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

ExperimentConfig experiment_from(const std::string& config_flag) {
  if (const auto path = resolve_config_path(config_flag)) return load_experiment_config(*path);
  return {};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  return out;
}

struct TrainArgs {
  std::string config;
  std::string out;
  std::string log;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  ExperimentConfig exp = experiment_from(a.config);
  if (a.seed) exp.train.seed = *a.seed;

  ProgressSink sink;
  if (!a.quiet && exp.train.log_every > 0) {
    sink.on_episode = [&](const EpisodeRecord& r) {
      if (r.episode % exp.train.log_every == 0 || r.episode == exp.train.episodes)
        std::cerr << "episode " << r.episode << "/" << exp.train.episodes << "  reward " << r.total_reward
                  << "  epsilon " << r.epsilon << "\n";
    };
  }
  const TrainResult result = train(exp.train, sink);
  save_checkpoint(result.checkpoint, a.out);
  if (!a.log.empty()) {
    auto out = open_out(a.log);
    write_training_log(out, result.episodes);
  }
  const auto& last = result.episodes.back();
  std::cout << "trained " << result.episodes.size() << " episodes (" << result.checkpoint.total_steps
            << " steps); final episode reward " << last.total_reward << ", epsilon " << last.epsilon
            << "; checkpoint written to " << a.out << "\n";
  return kExitOk;
}

struct RecommendArgs {
  std::string ckpt;
  std::string load, incentives, budget;
  bool json = false;
};

int cmd_recommend(const RecommendArgs& a) {
  const AdvisorService service(load_checkpoint(a.ckpt));
  const State state{parse_quantity(a.load, "--load"), parse_quantity(a.incentives, "--incentives"),
                    parse_quantity(a.budget, "--budget")};
  const Recommendation r = service.recommend(state);
  if (a.json) {
    std::cout << to_json(r).dump() << "\n";
  } else {
    std::cout << label(r.action) << "\n"
              << "  Q(Don't Install) = " << format_double(r.q_dont_install) << "\n"
              << "  Q(Install)       = " << format_double(r.q_install) << "\n";
  }
  return kExitOk;
}

struct GridArgs {
  std::string ckpt;
  std::string config;
  std::string out;
  std::vector<std::string> axes;
  std::vector<std::string> fixes;
  std::string action = "install";
};

GridDefaults grid_defaults_from(const std::string& config_flag) { return experiment_from(config_flag).grid; }

int cmd_map(const GridArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  const GridSpec grid = parse_grid(a.axes, a.fixes, ckpt.config.env, grid_defaults_from(a.config), GridMode::Map);
  const DqnAgent agent = make_agent(ckpt);
  const DecisionMap map = decision_map(agent, grid, ckpt.config.env);
  auto out = open_out(a.out);
  write_decision_map_csv(out, map);
  std::cout << "wrote " << map.entries.size() << " decisions to " << a.out << "\n";
  return kExitOk;
}

int cmd_surface(const GridArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  const GridSpec grid = parse_grid(a.axes, a.fixes, ckpt.config.env, grid_defaults_from(a.config), GridMode::Surface);
  const DqnAgent agent = make_agent(ckpt);
  const QSurface surface = q_surface(agent, grid, action_from_key(a.action), ckpt.config.env);
  auto out = open_out(a.out);
  out << q_surface_to_json(surface).dump(1) << "\n";
  std::cout << "wrote " << surface.values.rows() << "x" << surface.values.cols() << " surface to " << a.out << "\n";
  return kExitOk;
}

int cmd_curve(const std::string& log, const std::string& out_path) {
  std::ifstream in(log);
  if (!in) throw InvalidArgument("cannot open training log '" + log + "'");
  const auto records = read_training_log(in);
  auto out = open_out(out_path);
  out << "episode,total_reward\n";
  for (const auto& r : records) out << r.episode << ',' << format_double(r.total_reward) << '\n';
  std::cout << "wrote " << records.size() << " curve points to " << out_path << "\n";
  return kExitOk;
}

struct ServeArgs {
  std::string ckpt;
  std::string config;
  std::string log;
  std::string static_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
};

int cmd_serve(const ServeArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  std::vector<EpisodeRecord> curve;
  if (!a.log.empty()) {
    std::ifstream in(a.log);
    if (!in) throw InvalidArgument("cannot open training log '" + a.log + "'");
    curve = read_training_log(in);
  }
  const AdvisorService service(ckpt, grid_defaults_from(a.config), std::move(curve));

  httplib::Server server;
  mount_api(server, service);
  if (!a.static_dir.empty() && !server.set_mount_point("/", a.static_dir))
    throw InvalidArgument("static directory '" + a.static_dir + "' does not exist");
  if (!server.bind_to_port(a.host, a.port)) {
    std::cerr << "error: cannot bind " << a.host << ":" << a.port << " (port in use?)\n";
    return kExitPort;
  }
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  std::cout << "serving on http://" << a.host << ":" << a.port << "\n" << std::flush;
  server.listen_after_bind();
  g_server = nullptr;
  return kExitOk;
}

void add_grid_options(CLI::App* cmd, GridArgs& a) {
  cmd->add_option("--ckpt", a.ckpt, "Checkpoint file")->required();
  cmd->add_option("--out", a.out, "Output path")->required();
  cmd->add_option("--config", a.config, "Experiment config supplying grid defaults");
  cmd->add_option("--axis", a.axes, "Swept variable: name | name:points | name:min:max:points (repeatable)");
  cmd->add_option("--fix", a.fixes, "Held variable value: name=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep Q-Network advisor for farm PV installation decisions"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train the agent and write a checkpoint and training log");
  train_cmd->add_option("--config", train_args.config, "Experiment config JSON (default: $PV_ADVISOR_CONFIG)");
  train_cmd->add_option("--out", train_args.out, "Checkpoint output path")->required();
  train_cmd->add_option("--log", train_args.log, "Training log CSV output path");
  train_cmd->add_option("--seed", train_args.seed, "Master seed (overrides the config)");
  train_cmd->add_flag("--quiet", train_args.quiet, "Suppress per-episode progress");

  RecommendArgs rec_args;
  auto* rec_cmd = app.add_subcommand("recommend", "Recommend an action for one investor state");
  rec_cmd->add_option("--ckpt", rec_args.ckpt, "Checkpoint file")->required();
  rec_cmd->add_option("--load", rec_args.load, "Farm load (kW)")->required();
  rec_cmd->add_option("--incentives", rec_args.incentives, "Government incentives")->required();
  rec_cmd->add_option("--budget", rec_args.budget, "Installation budget")->required();
  rec_cmd->add_flag("--json", rec_args.json, "Emit JSON");

  GridArgs map_args;
  auto* map_cmd = app.add_subcommand("map", "Export the decision map as CSV");
  add_grid_options(map_cmd, map_args);

  GridArgs surf_args;
  auto* surf_cmd = app.add_subcommand("surface", "Export a Q-value surface over two variables as JSON");
  add_grid_options(surf_cmd, surf_args);
  surf_cmd->add_option("--action", surf_args.action, "install | dont_install");

  std::string curve_log, curve_out;
  auto* curve_cmd = app.add_subcommand("curve", "Export the reward-per-episode curve from a training log");
  curve_cmd->add_option("--log", curve_log, "Training log CSV")->required();
  curve_cmd->add_option("--out", curve_out, "Output CSV")->required();

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the advisor HTTP API");
  serve_cmd->add_option("--ckpt", serve_args.ckpt, "Checkpoint file")->required();
  serve_cmd->add_option("--port", serve_args.port, "TCP port");
  serve_cmd->add_option("--host", serve_args.host, "Bind address");
  serve_cmd->add_option("--static-dir", serve_args.static_dir, "Directory of UI assets served at /");
  serve_cmd->add_option("--log", serve_args.log, "Training log CSV backing /api/curve");
  serve_cmd->add_option("--config", serve_args.config, "Experiment config supplying grid defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*train_cmd) return cmd_train(train_args);
    if (*rec_cmd) return cmd_recommend(rec_args);
    if (*map_cmd) return cmd_map(map_args);
    if (*surf_cmd) return cmd_surface(surf_args);
    if (*curve_cmd) return cmd_curve(curve_log, curve_out);
    if (*serve_cmd) return cmd_serve(serve_args);
  } catch (const Diverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const CheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
