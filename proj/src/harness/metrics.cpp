#include "smpe/harness/metrics.hpp"

#include "smpe/errors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace smpe::harness {

namespace {

constexpr const char* kColumns[] = {"step",        "episodes",    "eval_return",   "train_return",
                                    "mean_intrinsic", "actor_loss", "critic_loss", "critic_w_loss",
                                    "rec_loss",    "kl_loss",     "norm_loss",     "encodings_loss",
                                    "entropy",     "ed_updates",  "target_updates"};
constexpr std::size_t kNumColumns = std::size(kColumns);

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double parse_num(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

}  // namespace

std::string metrics_header() {
  std::string out;
  for (std::size_t i = 0; i < kNumColumns; ++i) {
    if (i) out += '\t';
    out += kColumns[i];
  }
  return out;
}

std::string format_metrics_row(const marl::MetricsRow& r) {
  const std::string cells[] = {std::to_string(r.step),
                               std::to_string(r.episodes),
                               num(r.eval_return),
                               num(r.train_return),
                               num(r.mean_intrinsic),
                               num(r.losses.actor),
                               num(r.losses.critic),
                               num(r.losses.critic_w),
                               num(r.losses.rec),
                               num(r.losses.kl),
                               num(r.losses.norm),
                               num(r.losses.encodings),
                               num(r.losses.entropy),
                               std::to_string(r.ed_updates),
                               std::to_string(r.target_updates)};
  std::string out;
  for (std::size_t i = 0; i < kNumColumns; ++i) {
    if (i) out += '\t';
    out += cells[i];
  }
  return out;
}

MetricsWriter::MetricsWriter(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw ConfigError("cannot write metrics file '" + path + "'");
  out_ << metrics_header() << '\n';
  out_.flush();
}

void MetricsWriter::write(const marl::MetricsRow& row) {
  if (any_ && row.step <= last_step_) throw UsageError("metrics rows must have increasing steps");
  out_ << format_metrics_row(row) << '\n';
  out_.flush();
  last_step_ = row.step;
  any_ = true;
}

std::vector<marl::MetricsRow> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read metrics file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != metrics_header()) throw ConfigError("unexpected metrics header in " + path);
  std::vector<marl::MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) cells.push_back(cell);
    if (cells.size() != kNumColumns) throw ConfigError("malformed metrics row in " + path);
    marl::MetricsRow r;
    r.step = std::stoull(cells[0]);
    r.episodes = std::stoull(cells[1]);
    r.eval_return = parse_num(cells[2]);
    r.train_return = parse_num(cells[3]);
    r.mean_intrinsic = parse_num(cells[4]);
    r.losses.actor = parse_num(cells[5]);
    r.losses.critic = parse_num(cells[6]);
    r.losses.critic_w = parse_num(cells[7]);
    r.losses.rec = parse_num(cells[8]);
    r.losses.kl = parse_num(cells[9]);
    r.losses.norm = parse_num(cells[10]);
    r.losses.encodings = parse_num(cells[11]);
    r.losses.entropy = parse_num(cells[12]);
    r.losses.mean_intrinsic = r.mean_intrinsic;
    r.ed_updates = std::stoull(cells[13]);
    r.target_updates = std::stoull(cells[14]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace smpe::harness
