#include "combexplain/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "combexplain/io.hpp"
#include "json.hpp"

namespace combexplain {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

constexpr const char* kFormat = "combexplain-checkpoint";

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const auto& s = ckpt.state;
  ordered_json j;
  j["format"] = kFormat;
  j["version"] = kCheckpointVersion;
  j["epoch"] = s.epoch;
  j["seed"] = ckpt.seed;
  j["theta"] = ordered_json::object();
  const auto names = ThetaParams::names();
  const auto values = s.params.theta.to_array();
  for (std::size_t c = 0; c < values.size(); ++c) j["theta"][names[c]] = values[c];
  j["adapter"] = s.params.adapter;
  ordered_json opt;
  opt["step"] = s.optimizer.theta.steps();
  opt["theta_m"] = s.optimizer.theta.first_moment();
  opt["theta_v"] = s.optimizer.theta.second_moment();
  opt["adapter_step"] = s.optimizer.adapter.steps();
  opt["adapter_m"] = s.optimizer.adapter.first_moment();
  opt["adapter_v"] = s.optimizer.adapter.second_moment();
  j["optimizer"] = std::move(opt);
  out << j.dump(2) << '\n';
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_atomic(path, [&](std::ostream& out) { write_checkpoint(out, ckpt); });
}

Checkpoint parse_checkpoint(std::istream& in, const AdamWOptions& adam) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", std::string()) != kFormat) {
      throw CheckpointError("not a combexplain checkpoint");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw CheckpointError("checkpoint version " + std::to_string(version) +
                            " is not supported (expected " +
                            std::to_string(kCheckpointVersion) + ")");
    }
    Checkpoint ckpt;
    ckpt.seed = j.at("seed").get<std::uint64_t>();
    auto& s = ckpt.state;
    s.epoch = j.at("epoch").get<std::size_t>();
    std::array<double, ThetaParams::kCount> theta{};
    const auto names = ThetaParams::names();
    for (std::size_t c = 0; c < theta.size(); ++c) theta[c] = j.at("theta").at(names[c]).get<double>();
    s.params.theta = ThetaParams::from_array(theta);
    s.params.adapter = j.at("adapter").get<std::vector<double>>();
    const auto& opt = j.at("optimizer");
    s.optimizer.theta = AdamW(ThetaParams::kCount, adam);
    s.optimizer.theta.restore(opt.at("step").get<std::size_t>(),
                              opt.at("theta_m").get<std::vector<double>>(),
                              opt.at("theta_v").get<std::vector<double>>());
    s.optimizer.adapter = AdamW(s.params.adapter.size(), adam);
    s.optimizer.adapter.restore(opt.at("adapter_step").get<std::size_t>(),
                                opt.at("adapter_m").get<std::vector<double>>(),
                                opt.at("adapter_v").get<std::vector<double>>());
    return ckpt;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const AdamWOptions& adam) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return parse_checkpoint(in, adam);
}

void check_compatible(const Checkpoint& ckpt, std::size_t embedding_dim) {
  const auto n = ckpt.state.params.adapter.size();
  if (n != 0 && n != embedding_dim) {
    throw CheckpointError("checkpoint adapter has dimension " + std::to_string(n) +
                          ", embeddings have " + std::to_string(embedding_dim));
  }
}

}  // namespace combexplain
