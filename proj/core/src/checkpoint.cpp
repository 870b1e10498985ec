#include "mgtd/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "mgtd/corpus.hpp"

namespace mgtd {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'M', 'G', 'T', 'D', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void write_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(out, bits);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t lo = read_u32(in);
  std::uint64_t hi = read_u32(in);
  return lo | (hi << 32);
}

float read_f32(std::istream& in) {
  const std::uint32_t bits = read_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

json epoch_to_json(const EpochRecord& r) {
  json j;
  j["epoch"] = r.epoch;
  j["train_loss"] = r.train_loss;
  j["L_con"] = r.l_con;
  j["L_cls_pos"] = r.l_cls_pos;
  j["L_cls_neg"] = r.l_cls_neg;
  j["val_accuracy"] = r.val_accuracy;
  j["val_macro_f1"] = r.val_macro_f1;
  j["val_micro_f1"] = r.val_micro_f1;
  j["val_loss"] = r.val_loss;
  return j;
}

EpochRecord epoch_from_json(const json& j) {
  EpochRecord r;
  r.epoch = j.at("epoch").get<int>();
  r.train_loss = j.at("train_loss").get<double>();
  r.l_con = j.at("L_con").get<double>();
  r.l_cls_pos = j.at("L_cls_pos").get<double>();
  r.l_cls_neg = j.at("L_cls_neg").get<double>();
  r.val_accuracy = j.at("val_accuracy").get<double>();
  r.val_macro_f1 = j.at("val_macro_f1").get<double>();
  r.val_micro_f1 = j.at("val_micro_f1").get<double>();
  r.val_loss = j.at("val_loss").get<double>();
  return r;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open checkpoint for writing: " +
                             path.string());
  }

  json header;
  header["config"] = json::parse(config_to_json(ckpt.config));
  header["label_coding"] = {{"human", kHumanLabelCode},
                            {"machine", kMachineLabelCode}};
  header["seed"] = ckpt.config.seed;
  header["best_epoch"] = ckpt.best_epoch;
  header["history"] = json::array();
  for (const auto& r : ckpt.history) header["history"].push_back(epoch_to_json(r));

  const std::string header_text = header.dump();

  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kVersion);
  write_u64(out, header_text.size());
  out.write(header_text.data(),
            static_cast<std::streamsize>(header_text.size()));

  write_u32(out, static_cast<std::uint32_t>(ckpt.params.tensor_count()));
  for (const auto& [name, tensor] : ckpt.params.entries()) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(tensor.shape.size()));
    for (std::size_t dim : tensor.shape) write_u64(out, dim);
    for (double v : tensor.data) write_f32(out, static_cast<float>(v));
  }

  if (!out) {
    throw std::runtime_error("failed while writing checkpoint to " +
                             path.string());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open checkpoint: " + path.string());
  }

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path.string());
  }
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  }

  const std::uint64_t header_len = read_u64(in);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("checkpoint: truncated header");

  json header = json::parse(header_text);
  Checkpoint ckpt;
  ckpt.config = config_from_json(header.at("config").dump());
  ckpt.best_epoch = header.at("best_epoch").get<int>();
  for (const auto& e : header.at("history")) {
    ckpt.history.push_back(epoch_from_json(e));
  }
  const auto& coding = header.at("label_coding");
  if (coding.at("human").get<int>() != kHumanLabelCode ||
      coding.at("machine").get<int>() != kMachineLabelCode) {
    throw std::runtime_error(
        "checkpoint: label coding does not match this build");
  }

  const std::uint32_t tensor_count = read_u32(in);
  for (std::uint32_t t = 0; t < tensor_count; ++t) {
    const std::uint32_t name_len = read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const std::uint32_t ndim = read_u32(in);
    std::vector<std::size_t> shape(ndim);
    for (auto& dim : shape) dim = static_cast<std::size_t>(read_u64(in));
    Tensor tensor(shape);
    for (double& v : tensor.data) v = static_cast<double>(read_f32(in));
    if (!in) throw std::runtime_error("checkpoint: truncated tensor data");
    ckpt.params.add(std::move(name), std::move(tensor));
  }

  return ckpt;
}

}  // namespace mgtd
