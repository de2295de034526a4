#include "primal/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "primal/errors.hpp"

namespace primal {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'P', 'M', 'C', 'K'};

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, sizeof(bits));
  put_u64(out, bits);
}

uint32_t get_u32(const std::string& in, size_t& pos) {
  if (pos + 4 > in.size()) throw Error("checkpoint: truncated");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<uint32_t>(static_cast<unsigned char>(in[pos + static_cast<size_t>(i)]))
         << (8 * i);
  pos += 4;
  return v;
}

uint64_t get_u64(const std::string& in, size_t& pos) {
  if (pos + 8 > in.size()) throw Error("checkpoint: truncated");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<uint64_t>(static_cast<unsigned char>(in[pos + static_cast<size_t>(i)]))
         << (8 * i);
  pos += 8;
  return v;
}

double get_f64(const std::string& in, size_t& pos) {
  uint64_t bits = get_u64(in, pos);
  double d;
  std::memcpy(&d, &bits, sizeof(d));
  return d;
}

}  // namespace

std::string Checkpoint::serialize() const {
  json header;
  header["model"] = model_kind;
  header["config"] = json::parse(config_json.empty() ? "{}" : config_json);
  std::vector<uint32_t> chars;
  chars.reserve(vocab.chars().size());
  for (char32_t c : vocab.chars()) chars.push_back(static_cast<uint32_t>(c));
  header["vocab_chars"] = chars;
  json table = json::array();
  for (const auto& [name, sd] : params) {
    json p;
    p["name"] = name;
    p["shape"] = sd.first;
    table.push_back(std::move(p));
  }
  header["params"] = std::move(table);
  std::string header_text = header.dump();

  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u64(out, header_text.size());
  out += header_text;
  for (const auto& [name, sd] : params)
    for (double d : sd.second) put_f64(out, d);
  return out;
}

Checkpoint Checkpoint::deserialize(const std::string& bytes) {
  size_t pos = 0;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw Error("checkpoint: bad magic");
  pos = 4;
  uint32_t version = get_u32(bytes, pos);
  if (version != kVersion)
    throw Error("checkpoint: unsupported version " + std::to_string(version));
  uint64_t hlen = get_u64(bytes, pos);
  if (pos + hlen > bytes.size()) throw Error("checkpoint: truncated header");
  json header;
  try {
    header = json::parse(bytes.substr(pos, hlen));
  } catch (const json::exception& ex) {
    throw Error(std::string("checkpoint: bad header: ") + ex.what());
  }
  pos += hlen;

  Checkpoint ck;
  ck.model_kind = header.at("model").get<std::string>();
  ck.config_json = header.at("config").dump();
  auto chars = header.at("vocab_chars").get<std::vector<uint32_t>>();
  if (chars.size() < 2) throw Error("checkpoint: vocab too small");
  for (size_t i = 2; i < chars.size(); ++i) ck.vocab.add(static_cast<char32_t>(chars[i]));
  for (const json& p : header.at("params")) {
    std::string name = p.at("name").get<std::string>();
    auto shape = p.at("shape").get<std::vector<size_t>>();
    size_t n = 1;
    for (size_t d : shape) n *= d;
    std::vector<double> data(n);
    for (size_t i = 0; i < n; ++i) data[i] = get_f64(bytes, pos);
    ck.params[name] = {std::move(shape), std::move(data)};
  }
  if (pos != bytes.size()) throw Error("checkpoint: trailing bytes");
  return ck;
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  std::string bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace primal
