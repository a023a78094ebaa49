#include "dynmeans/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dynmeans/version.hpp"

namespace dynmeans {

using json = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

json parse_line(const std::string& path, std::size_t lineno, const std::string& line) {
  json rec = json::parse(line, nullptr, false);
  if (rec.is_discarded() || !rec.is_object())
    throw MalformedInput(path, lineno, "not a JSON object record");
  return rec;
}

}  // namespace

void write_batch_sequence(const std::string& path, const BatchSequenceData& data) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < data.batches.size(); ++i) {
    json rec;
    rec["t"] = data.timesteps[i];
    rec["points"] = data.batches[i];
    out << rec.dump() << '\n';
  }
}

BatchSequenceData read_batch_sequence(const std::string& path) {
  auto in = open_in(path);
  BatchSequenceData data;
  std::string line;
  std::size_t lineno = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec = parse_line(path, lineno, line);
    if (!rec.contains("t") || !rec["t"].is_number_integer() || !rec.contains("points") ||
        !rec["points"].is_array())
      throw MalformedInput(path, lineno, "record needs integer \"t\" and array \"points\"");
    const std::int64_t t = rec["t"].get<std::int64_t>();
    if (!data.timesteps.empty() && t <= data.timesteps.back())
      throw MalformedInput(path, lineno, "timestep indices must be strictly increasing");
    Batch batch;
    for (const auto& jp : rec["points"]) {
      if (!jp.is_array() || jp.empty())
        throw MalformedInput(path, lineno, "each point must be a non-empty array");
      Point p;
      for (const auto& x : jp) {
        if (!x.is_number()) throw MalformedInput(path, lineno, "non-numeric coordinate");
        const double v = x.get<double>();
        if (!std::isfinite(v)) throw MalformedInput(path, lineno, "non-finite coordinate");
        p.push_back(v);
      }
      if (dim == 0) dim = p.size();
      if (p.size() != dim)
        throw MalformedInput(path, lineno, "point dimension mismatch (expected " +
                                               std::to_string(dim) + ")");
      batch.push_back(std::move(p));
    }
    data.timesteps.push_back(t);
    data.batches.push_back(std::move(batch));
  }
  return data;
}

void write_truth(const std::string& path, const TruthData& data) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    json rec;
    rec["t"] = data.timesteps[i];
    rec["labels"] = data.labels[i];
    out << rec.dump() << '\n';
  }
}

TruthData read_truth(const std::string& path) {
  auto in = open_in(path);
  TruthData data;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec = parse_line(path, lineno, line);
    if (!rec.contains("t") || !rec["t"].is_number_integer() || !rec.contains("labels") ||
        !rec["labels"].is_array())
      throw MalformedInput(path, lineno, "record needs integer \"t\" and array \"labels\"");
    const std::int64_t t = rec["t"].get<std::int64_t>();
    if (!data.timesteps.empty() && t <= data.timesteps.back())
      throw MalformedInput(path, lineno, "timestep indices must be strictly increasing");
    std::vector<ClusterId> labels;
    for (const auto& x : rec["labels"]) {
      if (!x.is_number_integer()) throw MalformedInput(path, lineno, "non-integer label");
      labels.push_back(x.get<ClusterId>());
    }
    data.timesteps.push_back(t);
    data.labels.push_back(std::move(labels));
  }
  return data;
}

void write_result(const std::string& path, const SequenceResult& result,
                  const RunConfig& cfg, const std::vector<std::int64_t>& timesteps,
                  bool zero_timing) {
  auto out = open_out(path);
  json config;
  config["lambda"] = cfg.params.lambda;
  config["q"] = cfg.params.q_penalty;
  config["tau"] = cfg.params.tau;
  if (cfg.reparam) {
    config["n_q"] = cfg.reparam->n_q;
    config["k_tau"] = cfg.reparam->k_tau;
  } else {
    config["n_q"] = nullptr;
    config["k_tau"] = nullptr;
  }
  config["restarts"] = cfg.restarts;
  config["max_iters"] = cfg.max_iters;
  config["seed"] = cfg.seed;
  config["version"] = kVersion;
  json header;
  header["config"] = std::move(config);
  out << header.dump() << '\n';

  for (std::size_t i = 0; i < result.steps.size(); ++i) {
    const auto& step = result.steps[i];
    json rec;
    rec["t"] = timesteps[i];
    rec["labels"] = step.labels;
    json clusters = json::array();
    for (const auto& c : step.clusters) {
      json jc;
      jc["id"] = c.id;
      jc["center"] = c.center;
      jc["weight"] = c.weight;
      jc["age"] = c.age;
      clusters.push_back(std::move(jc));
    }
    rec["clusters"] = std::move(clusters);
    rec["cost"] = step.cost;
    rec["iterations"] = step.iterations;
    rec["wall_s"] = zero_timing ? 0.0 : step.wall_seconds;
    rec["converged"] = step.converged;
    out << rec.dump() << '\n';
  }
}

ResultFileData read_result(const std::string& path) {
  auto in = open_in(path);
  ResultFileData data;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec = parse_line(path, lineno, line);
    if (!have_header) {
      if (!rec.contains("config") || !rec["config"].is_object())
        throw MalformedInput(path, lineno, "first record must carry \"config\"");
      const auto& c = rec["config"];
      data.lambda = c.at("lambda").get<double>();
      data.q_penalty = c.at("q").get<double>();
      data.tau = c.at("tau").get<double>();
      if (c.contains("n_q") && !c["n_q"].is_null()) {
        data.has_reparam = true;
        data.n_q = c["n_q"].get<double>();
        data.k_tau = c.at("k_tau").get<double>();
      }
      data.restarts = c.at("restarts").get<int>();
      data.max_iters = c.at("max_iters").get<int>();
      data.seed = c.at("seed").get<std::uint64_t>();
      data.version = c.at("version").get<std::string>();
      have_header = true;
      continue;
    }
    ResultFileData::Step step;
    try {
      step.t = rec.at("t").get<std::int64_t>();
      step.labels = rec.at("labels").get<std::vector<ClusterId>>();
      for (const auto& jc : rec.at("clusters")) {
        ClusterSnapshot snap;
        snap.id = jc.at("id").get<ClusterId>();
        snap.center = jc.at("center").get<Point>();
        snap.weight = jc.at("weight").get<double>();
        snap.age = jc.at("age").get<int>();
        step.clusters.push_back(std::move(snap));
      }
      step.cost = rec.at("cost").get<double>();
      step.iterations = rec.at("iterations").get<int>();
      step.wall_s = rec.at("wall_s").get<double>();
      step.converged = rec.at("converged").get<bool>();
    } catch (const json::exception& e) {
      throw MalformedInput(path, lineno, e.what());
    }
    data.steps.push_back(std::move(step));
  }
  if (!have_header && data.steps.empty() && lineno == 0)
    throw MalformedInput(path, 1, "empty result file (missing header record)");
  if (!have_header) throw MalformedInput(path, 1, "missing header record");
  return data;
}

void write_result_csv(const std::string& path, const ResultFileData& data) {
  auto out = open_out(path);
  out << "t,points,clusters,cost,iterations,wall_s,converged\n";
  for (const auto& s : data.steps) {
    out << s.t << ',' << s.labels.size() << ',' << s.clusters.size() << ','
        << json(s.cost).dump() << ',' << s.iterations << ',' << json(s.wall_s).dump() << ','
        << (s.converged ? 1 : 0) << '\n';
  }
}

namespace {

void sweep_row_fields(std::ostream& out, const SweepRow& r, char sep) {
  out << json(r.lambda).dump() << sep << json(r.n_q).dump() << sep << json(r.k_tau).dump()
      << sep << r.trials << sep << json(r.mean_tracked).dump() << sep
      << json(r.std_tracked).dump() << sep << json(r.mean_untracked).dump() << sep
      << json(r.std_untracked).dump() << sep << json(r.mean_step_ms).dump() << sep
      << json(r.std_step_ms).dump();
}

}  // namespace

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  auto out = open_out(path);
  out << "lambda,n_q,k_tau,trials,mean_tracked,std_tracked,mean_untracked,std_untracked,"
         "mean_step_ms,std_step_ms\n";
  for (const auto& r : rows) {
    sweep_row_fields(out, r, ',');
    out << '\n';
  }
}

void write_sweep_jsonl(const std::string& path, const std::vector<SweepRow>& rows) {
  auto out = open_out(path);
  for (const auto& r : rows) {
    json rec;
    rec["lambda"] = r.lambda;
    rec["n_q"] = r.n_q;
    rec["k_tau"] = r.k_tau;
    rec["trials"] = r.trials;
    rec["mean_tracked"] = r.mean_tracked;
    rec["std_tracked"] = r.std_tracked;
    rec["mean_untracked"] = r.mean_untracked;
    rec["std_untracked"] = r.std_untracked;
    rec["mean_step_ms"] = r.mean_step_ms;
    rec["std_step_ms"] = r.std_step_ms;
    out << rec.dump() << '\n';
  }
}

}  // namespace dynmeans
