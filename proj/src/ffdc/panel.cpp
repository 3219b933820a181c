#include "ffdc/panel.hpp"

#include "ffdc/errors.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace ffdc {

PanelDataset::PanelDataset(int num_products, int num_periods, int num_consumers)
    : J_(num_products), T_(num_periods) {
  if (num_products < 1 || num_periods < 1 || num_consumers < 0)
    throw ContractViolation("PanelDataset: invalid dimensions");
  const size_t n = num_consumers;
  ids_.assign(n, 0);
  type_.assign(n, -1);
  mu_.assign(n, 0.0);
  initial_.assign(n, {});
  y_.assign(n * T_, 0);
  z_.assign(n * T_, 0);
  e_.assign(n * T_ * J_, 0.0);
  p_.assign(n * T_ * J_, 0.0);
}

void PanelDataset::set_consumer(int i, int id, double mu, EndogenousState initial, int type) {
  ids_[i] = id;
  mu_[i] = mu;
  initial_[i] = initial;
  type_[i] = type;
}

void PanelDataset::set_period(int i, int t, int choice, int z, std::span<const double> e,
                              std::span<const double> p) {
  const size_t r = row(i, t);
  y_[r] = choice;
  z_[r] = z;
  std::copy(e.begin(), e.end(), e_.begin() + r * J_);
  std::copy(p.begin(), p.end(), p_.begin() + r * J_);
}

std::vector<EndogenousState> PanelDataset::states(int i, int duration_cap) const {
  std::vector<EndogenousState> out;
  out.reserve(T_ + 1);
  EndogenousState s = initial(i);
  s.duration = std::min(s.duration, duration_cap);
  out.push_back(s);
  for (int t = 0; t < T_; ++t) {
    s = transition(y_[row(i, t)], s, J_, duration_cap);
    out.push_back(s);
  }
  return out;
}

std::string format_real(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_file_atomically(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + tmp + "'");
    out << contents;
    if (!out) throw ValidationError("write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ValidationError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

void write_panel_csv(const PanelDataset& data, const std::string& consumers_path,
                     const std::string& panel_path) {
  const int J = data.num_products();
  std::string consumers = "id,mu,l1,d1\n";
  for (int i = 0; i < data.num_consumers(); ++i) {
    const auto s = data.initial(i);
    consumers += std::to_string(data.id(i)) + ',' + format_real(data.mu(i)) + ',' +
                 std::to_string(s.last_brand) + ',' + std::to_string(s.duration) + '\n';
  }

  std::string panel = "id,t,y,z_id";
  for (int j = 1; j <= J; ++j) panel += ",e_" + std::to_string(j);
  for (int j = 1; j <= J; ++j) panel += ",p_" + std::to_string(j);
  panel += '\n';
  for (int i = 0; i < data.num_consumers(); ++i) {
    const auto y = data.choices(i);
    const auto pv = data.prices(i);
    const std::string id = std::to_string(data.id(i));
    for (int t = 0; t < data.num_periods(); ++t) {
      panel += id;
      panel += ',' + std::to_string(t + 1) + ',' + std::to_string(y[t]) + ',' +
               std::to_string(pv.z[t]);
      for (double v : pv.e_at(t)) panel += ',' + format_real(v);
      for (double v : pv.p_at(t)) panel += ',' + format_real(v);
      panel += '\n';
    }
  }
  write_file_atomically(consumers_path, consumers);
  write_file_atomically(panel_path, panel);
}

namespace {

struct CsvReader {
  std::ifstream in;
  std::string path;
  int line_no = 0;

  explicit CsvReader(const std::string& p) : in(p), path(p) {
    if (!in) throw ValidationError("cannot open '" + p + "'");
  }

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields.clear();
      std::stringstream ss(line);
      std::string f;
      while (std::getline(ss, f, ',')) fields.push_back(f);
      if (!line.empty() && line.back() == ',') fields.emplace_back();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError(path + ":" + std::to_string(line_no) + ": " + msg);
  }

  template <class T>
  T parse(const std::string& s, const std::string& column) const {
    T v{};
    const auto* b = s.data();
    const auto* e = s.data() + s.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) fail("bad value '" + s + "' in column " + column);
    return v;
  }
};

}  // namespace

PanelDataset read_panel_csv(const std::string& consumers_path, const std::string& panel_path) {
  CsvReader cr(consumers_path);
  std::vector<std::string> f;
  if (!cr.next(f) || f != std::vector<std::string>{"id", "mu", "l1", "d1"})
    cr.fail("header must be exactly 'id,mu,l1,d1'");

  struct Info {
    int id;
    double mu;
    EndogenousState s;
  };
  std::vector<Info> infos;
  std::unordered_map<int, int> index;
  while (cr.next(f)) {
    if (f.size() != 4) cr.fail("expected 4 columns");
    Info info{cr.parse<int>(f[0], "id"), cr.parse<double>(f[1], "mu"),
              {cr.parse<int>(f[2], "l1"), cr.parse<int>(f[3], "d1")}};
    if (!index.emplace(info.id, static_cast<int>(infos.size())).second)
      cr.fail("duplicate consumer id " + f[0]);
    if (info.s.duration < 1) cr.fail("d1 must be >= 1");
    infos.push_back(info);
  }

  CsvReader pr(panel_path);
  if (!pr.next(f) || f.size() < 6 || (f.size() - 4) % 2 != 0) pr.fail("malformed header");
  const int J = static_cast<int>(f.size() - 4) / 2;
  std::vector<std::string> expected{"id", "t", "y", "z_id"};
  for (int j = 1; j <= J; ++j) expected.push_back("e_" + std::to_string(j));
  for (int j = 1; j <= J; ++j) expected.push_back("p_" + std::to_string(j));
  if (f != expected) pr.fail("header must be id,t,y,z_id,e_1..e_J,p_1..p_J");

  struct Row {
    int t, y, z;
    std::vector<double> e, p;
  };
  std::vector<std::vector<Row>> rows(infos.size());
  int T = 0;
  while (pr.next(f)) {
    if (static_cast<int>(f.size()) != 4 + 2 * J) pr.fail("wrong number of columns");
    const int id = pr.parse<int>(f[0], "id");
    auto it = index.find(id);
    if (it == index.end()) pr.fail("consumer id " + f[0] + " not in consumers file");
    Row r{pr.parse<int>(f[1], "t"), pr.parse<int>(f[2], "y"), pr.parse<int>(f[3], "z_id"), {}, {}};
    if (r.y < 0 || r.y > J) pr.fail("choice y out of range");
    if (r.z < 0) pr.fail("z_id must be >= 0");
    for (int j = 0; j < J; ++j) r.e.push_back(pr.parse<double>(f[4 + j], expected[4 + j]));
    for (int j = 0; j < J; ++j) r.p.push_back(pr.parse<double>(f[4 + J + j], expected[4 + J + j]));
    T = std::max(T, r.t);
    rows[it->second].push_back(std::move(r));
  }
  if (T < 1) throw ValidationError(panel_path + ": no observations");

  PanelDataset data(J, T, static_cast<int>(infos.size()));
  for (size_t i = 0; i < infos.size(); ++i) {
    const auto& info = infos[i];
    if (info.s.last_brand < 1 || info.s.last_brand > J)
      throw ValidationError(consumers_path + ": l1 out of range for consumer " +
                            std::to_string(info.id));
    data.set_consumer(static_cast<int>(i), info.id, info.mu, info.s);
    auto& rs = rows[i];
    if (static_cast<int>(rs.size()) != T)
      throw ValidationError(panel_path + ": consumer " + std::to_string(info.id) +
                            " does not have T=" + std::to_string(T) + " periods");
    std::sort(rs.begin(), rs.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
    for (int t = 0; t < T; ++t) {
      if (rs[t].t != t + 1)
        throw ValidationError(panel_path + ": consumer " + std::to_string(info.id) +
                              " has duplicate or missing periods");
      data.set_period(static_cast<int>(i), t, rs[t].y, rs[t].z, rs[t].e, rs[t].p);
    }
  }
  return data;
}

}  // namespace ffdc
