#include "aiig/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aiig {

namespace {

constexpr const char* kMagic = "aiig-ckpt";
constexpr int kVersion = 1;

void check_name(const std::string& name) {
  if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
    throw std::invalid_argument("checkpoint entry name must be non-empty without whitespace: '" +
                                name + "'");
  }
}

}  // namespace

void Checkpoint::add_dense(const std::string& name, const DenseNet& net) {
  check_name(name);
  entries.push_back({name, net.arch_string(), net.params});
}

void Checkpoint::add_recurrent(const std::string& name, const RecurrentNet& net) {
  check_name(name);
  entries.push_back({name, net.arch_string(), net.params});
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return true;
  }
  return false;
}

const Checkpoint::Entry& Checkpoint::entry(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return e;
  }
  throw std::out_of_range("checkpoint has no entry named '" + name + "'");
}

DenseNet Checkpoint::get_dense(const std::string& name) const {
  const Entry& e = entry(name);
  DenseNet net = DenseNet::from_arch_string(e.arch);
  if (net.param_count() != e.params.size()) {
    throw std::runtime_error("checkpoint entry '" + name + "' has " +
                             std::to_string(e.params.size()) + " params, arch wants " +
                             std::to_string(net.param_count()));
  }
  net.params = e.params;
  return net;
}

RecurrentNet Checkpoint::get_recurrent(const std::string& name) const {
  const Entry& e = entry(name);
  RecurrentNet net = RecurrentNet::from_arch_string(e.arch);
  if (net.param_count() != e.params.size()) {
    throw std::runtime_error("checkpoint entry '" + name + "' has " +
                             std::to_string(e.params.size()) + " params, arch wants " +
                             std::to_string(net.param_count()));
  }
  net.params = e.params;
  return net;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  os << kMagic << ' ' << kVersion << '\n';
  for (const auto& [k, v] : ckpt.meta) {
    check_name(k);
    os << "meta " << k << ' ' << v << '\n';
  }
  char buf[64];
  for (const auto& e : ckpt.entries) {
    check_name(e.name);
    os << "net " << e.name << ' ' << e.arch << '\n';
    os << "params " << e.params.size() << '\n';
    for (std::size_t i = 0; i < e.params.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%a", e.params[i]);
      os << buf << ((i % 4 == 3 || i + 1 == e.params.size()) ? '\n' : ' ');
    }
  }
  os << "end\n";
  if (!os) throw std::runtime_error("write failed for checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != kMagic) throw std::runtime_error(path + " is not a checkpoint file");
  if (version != kVersion) {
    throw std::runtime_error(path + ": unsupported checkpoint version " +
                             std::to_string(version));
  }
  Checkpoint ckpt;
  std::string tok;
  while (is >> tok) {
    if (tok == "meta") {
      std::string key;
      is >> key;
      std::string value;
      std::getline(is, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      ckpt.meta[key] = value;
    } else if (tok == "net") {
      Checkpoint::Entry e;
      is >> e.name;
      std::getline(is, e.arch);
      if (!e.arch.empty() && e.arch.front() == ' ') e.arch.erase(0, 1);
      std::string params_kw;
      std::size_t count = 0;
      is >> params_kw >> count;
      if (params_kw != "params") {
        throw std::runtime_error(path + ": expected 'params' after net " + e.name);
      }
      e.params.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        std::string num;
        if (!(is >> num)) throw std::runtime_error(path + ": truncated params for " + e.name);
        char* endp = nullptr;
        e.params[i] = std::strtod(num.c_str(), &endp);
        if (endp == num.c_str() || *endp != '\0') {
          throw std::runtime_error(path + ": bad float '" + num + "' in " + e.name);
        }
      }
      ckpt.entries.push_back(std::move(e));
    } else if (tok == "end") {
      return ckpt;
    } else {
      throw std::runtime_error(path + ": unexpected token '" + tok + "'");
    }
  }
  throw std::runtime_error(path + ": missing 'end' marker (truncated checkpoint)");
}

}  // namespace aiig
