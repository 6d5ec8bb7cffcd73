#pragma once

#include <map>
#include <string>
#include <vector>

#include "aiig/net.hpp"
#include "aiig/rnn.hpp"

namespace aiig {

// Text checkpoints: a small metadata block plus named parameter blobs written
// as C99 hexfloats, so save -> load reproduces every double bit-for-bit while
// staying diffable and versionable.

struct Checkpoint {
  struct Entry {
    std::string name;  // no whitespace
    std::string arch;  // "dense ..." or "gru ..."
    std::vector<double> params;
  };

  std::map<std::string, std::string> meta;
  std::vector<Entry> entries;

  void add_dense(const std::string& name, const DenseNet& net);
  void add_recurrent(const std::string& name, const RecurrentNet& net);
  bool has(const std::string& name) const;
  const Entry& entry(const std::string& name) const;  // throws if absent
  DenseNet get_dense(const std::string& name) const;
  RecurrentNet get_recurrent(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace aiig
