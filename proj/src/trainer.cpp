#include "pvdqn/trainer.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pvdqn/error.hpp"

namespace pvdqn {

using nlohmann::json;

SeedSet SeedSet::derive(std::uint64_t master) {
  return {master, derive_seed(master, "init"), derive_seed(master, "env"), derive_seed(master, "explore"),
          derive_seed(master, "replay")};
}

DqnAgent make_agent(const Checkpoint& ckpt) { return DqnAgent(ckpt.config.agent, ckpt.network, ckpt.n_i); }

double discounted_return(std::span<const double> rewards, double gamma) {
  double total = 0.0;
  double weight = 1.0;
  for (double r : rewards) {
    total += weight * r;
    weight *= gamma;
  }
  return total;
}

TrainResult train(const TrainConfig& cfg, const ProgressSink& sink) {
  validate(cfg);
  const SeedSet seeds = SeedSet::derive(cfg.seed);

  EnvConfig env_cfg = cfg.env;
  env_cfg.seed = seeds.env;
  Environment env(env_cfg);
  DqnAgent agent(cfg.agent, seeds.init);
  Rng explore_rng(seeds.explore);
  Rng replay_rng(seeds.replay);

  TrainResult result;
  result.episodes.reserve(cfg.episodes);
  std::uint64_t total_steps = 0;
  std::vector<double> rewards;

  for (std::size_t e = 1; e <= cfg.episodes; ++e) {
    State state = env.reset();
    rewards.clear();
    double loss_sum = 0.0;
    std::size_t loss_count = 0;

    bool done = false;
    while (!done) {
      const Eigen::Vector3d x = normalize_state(state, cfg.env);
      const Action action = agent.select_action(x, explore_rng);
      const StepOutcome out = env.step(action);
      agent.schedule().advance();
      agent.store({x, action, out.reward, normalize_state(out.next_state, cfg.env), out.done});

      std::optional<double> loss;
      if (agent.ready()) {
        const auto batch = agent.buffer().sample(agent.batch_size(), replay_rng);
        const double l = agent.train_step(batch);
        if (!std::isfinite(l) || !agent.network().all_finite())
          throw Diverged(e, env.step_index(), "non-finite loss or parameter");
        loss = l;
        loss_sum += l;
        ++loss_count;
      }

      if (sink.on_step) sink.on_step({e, env.step_index() - 1, state, action, out, loss});
      rewards.push_back(out.reward);
      ++total_steps;
      state = out.next_state;
      done = out.done;
    }

    EpisodeRecord rec;
    rec.episode = e;
    for (double r : rewards) rec.total_reward += r;
    rec.discounted_return = discounted_return(rewards, cfg.agent.gamma);
    if (loss_count > 0) rec.mean_loss = loss_sum / double(loss_count);
    rec.epsilon = agent.schedule().value();
    rec.steps = rewards.size();
    if (sink.on_episode) sink.on_episode(rec);
    result.episodes.push_back(rec);
  }

  result.checkpoint.config = cfg;
  result.checkpoint.network = agent.network();
  result.checkpoint.n_i = agent.schedule().steps();
  result.checkpoint.total_steps = total_steps;
  result.checkpoint.seeds = seeds;
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization

std::string checkpoint_to_string(const Checkpoint& ckpt) {
  json layers = json::array();
  for (const auto& l : ckpt.network.layers()) {
    std::vector<double> w(l.weights.data(), l.weights.data() + l.weights.size());
    std::vector<double> b(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back({{"rows", l.weights.rows()},
                      {"cols", l.weights.cols()},
                      {"activation", to_string(l.activation)},
                      {"weights", w},
                      {"bias", b}});
  }
  const json j = {{"format_version", ckpt.format_version},
                  {"config", to_json(ckpt.config)},
                  {"config_hash", config_hash(ckpt.config)},
                  {"layers", layers},
                  {"n_i", ckpt.n_i},
                  {"total_steps", ckpt.total_steps},
                  {"rng",
                   {{"master_seed", ckpt.seeds.master},
                    {"init_seed", ckpt.seeds.init},
                    {"env_seed", ckpt.seeds.env},
                    {"explore_seed", ckpt.seeds.explore},
                    {"replay_seed", ckpt.seeds.replay}}}};
  return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
  using Kind = CheckpointError::Kind;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CheckpointError(Kind::Malformed, std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("format_version") || !j["format_version"].is_number_integer())
    throw CheckpointError(Kind::Malformed, "checkpoint lacks an integer format_version");
  const int version = j["format_version"].get<int>();
  if (version != kCheckpointFormatVersion)
    throw CheckpointError(Kind::VersionMismatch, "checkpoint format_version " + std::to_string(version) +
                                                     " is not supported (expected " +
                                                     std::to_string(kCheckpointFormatVersion) + ")");
  try {
    Checkpoint ckpt;
    ckpt.format_version = version;
    ckpt.config = train_config_from_json(j.at("config"));
    std::vector<DenseLayer<double>> layers;
    for (const auto& lj : j.at("layers")) {
      const auto rows = lj.at("rows").get<Eigen::Index>();
      const auto cols = lj.at("cols").get<Eigen::Index>();
      const auto w = lj.at("weights").get<std::vector<double>>();
      const auto b = lj.at("bias").get<std::vector<double>>();
      if (rows < 1 || cols < 1 || std::size_t(rows * cols) != w.size() || std::size_t(rows) != b.size())
        throw CheckpointError(Kind::Malformed, "checkpoint layer dimensions do not match data lengths");
      DenseLayer<double> layer;
      layer.weights = Eigen::Map<const RowMatrix<double>>(w.data(), rows, cols);
      layer.bias = Eigen::Map<const Vector<double>>(b.data(), rows);
      layer.activation = activation_from_string(lj.at("activation").get<std::string>());
      layers.push_back(std::move(layer));
    }
    ckpt.network = Mlp(std::move(layers));
    if (!ckpt.network.all_finite()) throw CheckpointError(Kind::Malformed, "checkpoint holds non-finite weights");
    ckpt.n_i = j.at("n_i").get<std::uint64_t>();
    ckpt.total_steps = j.at("total_steps").get<std::uint64_t>();
    const auto& r = j.at("rng");
    ckpt.seeds = {r.at("master_seed").get<std::uint64_t>(), r.at("init_seed").get<std::uint64_t>(),
                  r.at("env_seed").get<std::uint64_t>(), r.at("explore_seed").get<std::uint64_t>(),
                  r.at("replay_seed").get<std::uint64_t>()};
    if (j.contains("config_hash") && j["config_hash"] != config_hash(ckpt.config))
      throw CheckpointError(Kind::Malformed, "checkpoint config_hash does not match its config");
    validate(ckpt.config);
    make_agent(ckpt);  // checks network shape against the agent contract
    return ckpt;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(Kind::Malformed, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write checkpoint '" + path.string() + "'");
  out << checkpoint_to_string(ckpt);
  if (!out) throw InvalidArgument("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::MissingFile, "cannot open checkpoint '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

// ---------------------------------------------------------------------------
// Training log

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_training_log(std::ostream& out, std::span<const EpisodeRecord> records) {
  out << kTrainingLogHeader << '\n';
  for (const auto& r : records) {
    out << r.episode << ',' << format_double(r.total_reward) << ',' << format_double(r.discounted_return) << ','
        << (r.mean_loss ? format_double(*r.mean_loss) : std::string()) << ',' << format_double(r.epsilon) << ','
        << r.steps << '\n';
  }
}

std::string training_log_to_string(std::span<const EpisodeRecord> records) {
  std::ostringstream ss;
  write_training_log(ss, records);
  return ss.str();
}

namespace {

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidArgument("training log: bad number '" + s + "'");
  return v;
}

}  // namespace

std::vector<EpisodeRecord> read_training_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTrainingLogHeader)
    throw InvalidArgument("training log: missing or unexpected header");
  std::vector<EpisodeRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 6) throw InvalidArgument("training log: expected 6 columns in '" + line + "'");
    EpisodeRecord r;
    r.episode = std::size_t(parse_double(f[0]));
    r.total_reward = parse_double(f[1]);
    r.discounted_return = parse_double(f[2]);
    if (!f[3].empty()) r.mean_loss = parse_double(f[3]);
    r.epsilon = parse_double(f[4]);
    r.steps = std::size_t(parse_double(f[5]));
    out.push_back(r);
  }
  return out;
}

}  // namespace pvdqn
