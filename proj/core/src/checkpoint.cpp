#include "floordiff/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace floordiff::num {

namespace {

constexpr char kMagic[8] = {'F', 'D', 'C', 'K', 'P', 'T', '0', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, 4);
}

void write_u64(std::ostream& os, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, 8);
}

void write_f64(std::ostream& os, double v) { write_u64(os, std::bit_cast<std::uint64_t>(v)); }

void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_tensor_data(std::ostream& os, const Tensor& t) {
  for (std::int64_t i = 0; i < t.size(); ++i) write_f64(os, t[i]);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char buf[4];
  is.read(reinterpret_cast<char*>(buf), 4);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& is) { return std::bit_cast<double>(read_u64(is)); }

std::string read_string(std::istream& is) {
  const std::uint32_t len = read_u32(is);
  std::string s(len, '\0');
  is.read(s.data(), static_cast<std::streamsize>(len));
  if (!is) throw std::runtime_error("checkpoint: truncated string");
  return s;
}

Tensor read_tensor(std::istream& is) {
  const std::uint32_t ndim = read_u32(is);
  std::vector<int> shape(ndim);
  for (auto& d : shape) d = static_cast<int>(read_u32(is));
  Tensor t(shape);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = read_f64(is);
  return t;
}

void read_tensor_data_into(std::istream& is, Tensor& t) {
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = read_f64(is);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof(kMagic));
  write_u32(os, static_cast<std::uint32_t>(checkpoint.metadata.size()));
  for (const auto& [key, value] : checkpoint.metadata) {
    write_string(os, key);
    write_string(os, value);
  }
  write_u32(os, static_cast<std::uint32_t>(checkpoint.params.count()));
  for (std::size_t i = 0; i < checkpoint.params.count(); ++i) {
    const Tensor& t = checkpoint.params.tensor(i);
    write_string(os, checkpoint.params.name(i));
    write_u32(os, static_cast<std::uint32_t>(t.rank()));
    for (int d = 0; d < t.rank(); ++d) write_u32(os, static_cast<std::uint32_t>(t.dim(d)));
    write_tensor_data(os, t);
  }
  os.put(checkpoint.optimizer.has_value() ? 1 : 0);
  if (checkpoint.optimizer.has_value()) {
    const OptimizerState& opt = *checkpoint.optimizer;
    if (opt.first_moment.size() != checkpoint.params.count()) {
      throw std::invalid_argument("checkpoint: optimizer state does not match parameters");
    }
    write_f64(os, opt.config.learning_rate);
    write_f64(os, opt.config.beta1);
    write_f64(os, opt.config.beta2);
    write_f64(os, opt.config.eps);
    write_f64(os, opt.config.weight_decay);
    write_u64(os, static_cast<std::uint64_t>(opt.step));
    for (std::size_t i = 0; i < checkpoint.params.count(); ++i) {
      write_tensor_data(os, opt.first_moment[i]);
      write_tensor_data(os, opt.second_moment[i]);
    }
  }
  os.flush();
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path.string());
  }
  Checkpoint ckpt;
  const std::uint32_t meta_count = read_u32(is);
  for (std::uint32_t i = 0; i < meta_count; ++i) {
    std::string key = read_string(is);
    ckpt.metadata[std::move(key)] = read_string(is);
  }
  const std::uint32_t param_count = read_u32(is);
  for (std::uint32_t i = 0; i < param_count; ++i) {
    std::string name = read_string(is);
    ckpt.params.add(std::move(name), read_tensor(is));
  }
  const int has_opt = is.get();
  if (has_opt == 1) {
    OptimizerState opt;
    opt.config.learning_rate = read_f64(is);
    opt.config.beta1 = read_f64(is);
    opt.config.beta2 = read_f64(is);
    opt.config.eps = read_f64(is);
    opt.config.weight_decay = read_f64(is);
    opt.step = static_cast<std::int64_t>(read_u64(is));
    for (std::size_t i = 0; i < ckpt.params.count(); ++i) {
      Tensor m(ckpt.params.tensor(i).shape());
      Tensor v(ckpt.params.tensor(i).shape());
      read_tensor_data_into(is, m);
      read_tensor_data_into(is, v);
      opt.first_moment.push_back(std::move(m));
      opt.second_moment.push_back(std::move(v));
    }
    ckpt.optimizer = std::move(opt);
  } else if (has_opt != 0) {
    throw std::runtime_error("checkpoint: malformed optimizer flag");
  }
  return ckpt;
}

}  // namespace floordiff::num
