#include "pvdqn/advisor.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <httplib.h>

#include "pvdqn/error.hpp"

namespace pvdqn {

using nlohmann::json;

json to_json(const Recommendation& r) {
  return {{"action", label(r.action)}, {"q_dont_install", r.q_dont_install}, {"q_install", r.q_install}};
}

double parse_quantity(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v) || v < 0.0)
    throw InvalidArgument(what + ": expected a non-negative number, got '" + text + "'");
  return v;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::size_t parse_points(const std::string& text) {
  std::size_t n = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), n);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size() || n < 1 || n > 100000)
    throw InvalidArgument("grid: point count must be an integer in [1, 100000], got '" + text + "'");
  return n;
}

}  // namespace

GridSpec parse_grid(const std::vector<std::string>& axes, const std::vector<std::string>& fixes, const EnvConfig& cfg,
                    const GridDefaults& defaults, GridMode mode) {
  GridSpec g;
  g.slice = default_slice(cfg, defaults);
  if (axes.empty()) {
    g = mode == GridMode::Map ? default_grid(cfg, defaults)
                              : surface_grid(cfg, StateVar::Budget, StateVar::FarmLoad, defaults);
  }
  for (const auto& spec : axes) {
    const auto parts = split(spec, ':');
    if (parts.empty()) throw InvalidArgument("grid: empty axis spec");
    const StateVar v = state_var_from_string(parts.at(0));
    if (g.sweep[std::size_t(v)]) throw InvalidArgument(std::string("grid: axis ") + name(v) + " given twice");
    Axis a{range_of(cfg, v).min, range_of(cfg, v).max, defaults.points};
    if (parts.size() == 2) {
      a.points = parse_points(parts[1]);
    } else if (parts.size() == 4) {
      a.min = parse_quantity(parts[1], std::string("grid ") + name(v) + " min");
      a.max = parse_quantity(parts[2], std::string("grid ") + name(v) + " max");
      a.points = parse_points(parts[3]);
    } else if (parts.size() != 1) {
      throw InvalidArgument("grid: axis spec must be name, name:points or name:min:max:points, got '" + spec + "'");
    }
    g.sweep[std::size_t(v)] = a;
  }
  for (const auto& spec : fixes) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw InvalidArgument("grid: fix spec must be name=value, got '" + spec + "'");
    const StateVar v = state_var_from_string(spec.substr(0, eq));
    if (g.sweep[std::size_t(v)]) throw InvalidArgument(std::string("grid: ") + name(v) + " is both swept and fixed");
    set(g.slice, v, parse_quantity(spec.substr(eq + 1), std::string("grid ") + name(v)));
  }
  g.validate();
  if (mode == GridMode::Surface && g.swept().size() != 2)
    throw InvalidArgument("surface export needs exactly 2 swept variables, got " + std::to_string(g.swept().size()));
  return g;
}

AdvisorService::AdvisorService(const Checkpoint& ckpt, GridDefaults grid, std::vector<EpisodeRecord> curve)
    : agent_(make_agent(ckpt)),
      env_(ckpt.config.env),
      grid_(grid),
      curve_(std::move(curve)),
      version_(ckpt.format_version),
      hash_(config_hash(ckpt.config)) {}

Recommendation AdvisorService::recommend(const State& state) const {
  const auto q = agent_.q_values(state, env_);
  return {greedy_action(q), q[0], q[1]};
}

json AdvisorService::health() const {
  json ranges = json::object();
  for (auto v : kStateVars) ranges[name(v)] = json::array({range_of(env_, v).min, range_of(env_, v).max});
  return {{"status", "ok"},
          {"checkpoint_version", version_},
          {"config_hash", hash_},
          {"ranges", ranges},
          {"grid_points", grid_.points}};
}

json AdvisorService::map(const GridSpec& grid) const { return decision_map_to_json(decision_map(agent_, grid, env_)); }

json AdvisorService::surface(const GridSpec& grid, Action action) const {
  return q_surface_to_json(q_surface(agent_, grid, action, env_));
}

json AdvisorService::curve() const {
  json points = json::array();
  for (const auto& r : curve_) points.push_back({{"episode", r.episode}, {"total_reward", r.total_reward}});
  return {{"points", points}};
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

std::vector<std::string> values(const httplib::Request& req, const char* key) {
  std::vector<std::string> out;
  const auto n = req.get_param_value_count(key);
  for (std::size_t i = 0; i < n; ++i) out.push_back(req.get_param_value(key, i));
  return out;
}

std::string required(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) throw InvalidArgument(std::string("missing query parameter '") + key + "'");
  return req.get_param_value(key);
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      send_json(res, 200, f(req));
    } catch (const InvalidArgument& e) {
      send_json(res, 400, {{"error", e.what()}});
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", e.what()}});
    }
  };
}

}  // namespace

void mount_api(httplib::Server& server, const AdvisorService& service) {
  const AdvisorService* s = &service;
  server.Get("/api/health", guarded([s](const httplib::Request&) { return s->health(); }));
  server.Get("/api/recommend", guarded([s](const httplib::Request& req) {
               const State state{parse_quantity(required(req, "load"), "load"),
                                 parse_quantity(required(req, "incentives"), "incentives"),
                                 parse_quantity(required(req, "budget"), "budget")};
               return to_json(s->recommend(state));
             }));
  server.Get("/api/map", guarded([s](const httplib::Request& req) {
               return s->map(parse_grid(values(req, "axis"), values(req, "fix"), s->env_config(), s->grid_defaults(),
                                        GridMode::Map));
             }));
  server.Get("/api/qsurface", guarded([s](const httplib::Request& req) {
               const Action action = action_from_key(required(req, "action"));
               return s->surface(parse_grid(values(req, "axis"), values(req, "fix"), s->env_config(),
                                            s->grid_defaults(), GridMode::Surface),
                                 action);
             }));
  server.Get("/api/curve", guarded([s](const httplib::Request&) { return s->curve(); }));
}

}  // namespace pvdqn
