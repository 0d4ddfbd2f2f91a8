#include "vidqual/checkpoint.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace vq::ckpt {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr char kMagic[8] = {'V', 'Q', 'C', 'K', 'P', 'T', '1', '\0'};

ordered_json config_to_json(const model::ModelConfig& c) {
  return ordered_json{{"embed_dim", c.embed_dim},
                      {"decoder_layers", c.decoder_layers},
                      {"decoder_heads", c.decoder_heads},
                      {"mlp_hidden", c.mlp_hidden},
                      {"keyframe_resolution", c.keyframe_resolution},
                      {"vision_patch", c.vision_patch},
                      {"motion_frame_resolution", c.motion_frame_resolution},
                      {"tau", c.tau},
                      {"alpha", c.alpha},
                      {"max_motion_positions", c.max_motion_positions},
                      {"max_positions", c.max_positions},
                      {"vocab_size", c.vocab_size}};
}

model::ModelConfig config_from_json(const ordered_json& j) {
  model::ModelConfig c;
  c.embed_dim = j.at("embed_dim").get<int>();
  c.decoder_layers = j.at("decoder_layers").get<int>();
  c.decoder_heads = j.at("decoder_heads").get<int>();
  c.mlp_hidden = j.at("mlp_hidden").get<int>();
  c.keyframe_resolution = j.at("keyframe_resolution").get<int>();
  c.vision_patch = j.at("vision_patch").get<int>();
  c.motion_frame_resolution = j.at("motion_frame_resolution").get<int>();
  c.tau = j.at("tau").get<int>();
  c.alpha = j.at("alpha").get<int>();
  c.max_motion_positions = j.at("max_motion_positions").get<int>();
  c.max_positions = j.at("max_positions").get<int>();
  c.vocab_size = j.at("vocab_size").get<int>();
  return c;
}

}  // namespace

std::string config_hash(const model::ModelConfig& config) {
  const std::string dump = config_to_json(config).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : dump) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void save_checkpoint(const std::string& path, const model::Model& model,
                     const std::vector<std::string>& lineage) {
  ordered_json header;
  header["config"] = config_to_json(model.config);
  header["vocab"] = model.tokenizer.vocab();
  header["lineage"] = lineage;
  ordered_json index = ordered_json::array();
  for (const auto& [name, mat] : model.params)
    index.push_back(
        ordered_json{{"name", name}, {"rows", mat.rows}, {"cols", mat.cols}});
  header["params"] = index;
  const std::string head = header.dump();

  std::ofstream out(path, std::ios::binary);
  require(out.good(), "save_checkpoint: cannot open " + path);
  out.write(kMagic, 8);
  const std::uint64_t len = head.size();
  out.write(reinterpret_cast<const char*>(&len), 8);
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const auto& [name, mat] : model.params)
    out.write(reinterpret_cast<const char*>(mat.v.data()),
              static_cast<std::streamsize>(mat.size() * sizeof(double)));
  require(out.good(), "save_checkpoint: write failed for " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "load_checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  require(in.good() && std::memcmp(magic, kMagic, 8) == 0,
          "load_checkpoint: bad magic in " + path);
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 8);
  require(in.good() && len > 0 && len < (1ULL << 30),
          "load_checkpoint: bad header length in " + path);
  std::string head(len, '\0');
  in.read(head.data(), static_cast<std::streamsize>(len));
  require(in.good(), "load_checkpoint: truncated header in " + path);

  ordered_json header;
  try {
    header = ordered_json::parse(head);
  } catch (const std::exception& e) {
    fail("load_checkpoint: malformed header in " + path + ": " + e.what());
  }

  LoadedCheckpoint out;
  out.model.config = config_from_json(header.at("config"));
  model::validate(out.model.config);
  out.model.tokenizer = nn::Tokenizer::from_vocab(
      header.at("vocab").get<std::vector<std::string>>());
  require(out.model.tokenizer.size() == out.model.config.vocab_size,
          "load_checkpoint: vocab size disagrees with config");
  out.lineage = header.at("lineage").get<std::vector<std::string>>();

  for (const auto& entry : header.at("params")) {
    const std::string name = entry.at("name").get<std::string>();
    const int rows = entry.at("rows").get<int>();
    const int cols = entry.at("cols").get<int>();
    require(rows > 0 && cols > 0, "load_checkpoint: bad shape for " + name);
    model::group_of(name);  // enforces known group prefixes
    Mat mat(rows, cols);
    in.read(reinterpret_cast<char*>(mat.v.data()),
            static_cast<std::streamsize>(mat.size() * sizeof(double)));
    require(in.good(), "load_checkpoint: truncated data for " + name);
    require(out.model.params.emplace(name, std::move(mat)).second,
            "load_checkpoint: duplicate parameter " + name);
  }
  return out;
}

}  // namespace vq::ckpt
