#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "blockmix/errors.hpp"
#include "blockmix/network.hpp"

namespace blockmix {
namespace {

bool parse_long(std::string_view text, long& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

std::uint64_t pair_key(long i, long j) {
  return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j);
}

}  // namespace

SparseNetwork load_edge_list(std::istream& in, const EdgeAlphabet& alphabet,
                             std::optional<bool> directed) {
  std::optional<long> declared_n;
  std::optional<bool> header_directed;
  std::vector<std::pair<long, std::string>> labels;

  struct Row {
    long i, j, v;
  };
  std::vector<Row> rows;
  std::unordered_set<std::uint64_t> seen;
  std::vector<std::size_t> row_lines;

  std::string line;
  std::size_t line_no = 0;
  long max_id = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view view(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      if (view.starts_with("#n=")) {
        long n = 0;
        if (!parse_long(view.substr(3), n) || n < 0) throw ParseError(line_no, "bad #n= header");
        declared_n = n;
      } else if (view.starts_with("#directed=")) {
        auto flag = view.substr(10);
        if (flag != "0" && flag != "1") throw ParseError(line_no, "bad #directed= header");
        header_directed = flag == "1";
      } else if (view.starts_with("#label\t")) {
        auto fields = split_fields(view.substr(7));
        long id = 0;
        if (fields.size() < 2 || !parse_long(fields[0], id) || id < 0)
          throw ParseError(line_no, "bad #label line");
        auto name_start = view.find(fields[1], 7);
        labels.emplace_back(id, std::string(view.substr(name_start)));
      }
      continue;
    }
    auto fields = split_fields(view);
    if (fields.empty()) continue;
    if (fields.size() != 3) throw ParseError(line_no, "expected three fields 'i j v'");
    long i = 0, j = 0, v = 0;
    if (!parse_long(fields[0], i) || !parse_long(fields[1], j) || !parse_long(fields[2], v))
      throw ParseError(line_no, "non-integer field");
    if (i < 0 || j < 0 || i > 0xfffffffeL || j > 0xfffffffeL)
      throw ParseError(line_no, "node id out of range");
    if (!alphabet.index_of(static_cast<int>(v)) || v != static_cast<int>(v))
      throw ParseError(line_no, "edge value " + std::to_string(v) + " outside alphabet");
    if (i == j) {
      if (v != alphabet.zero_label()) throw ParseError(line_no, "self-loop with nonzero value");
      max_id = std::max(max_id, i);
      continue;
    }
    if (!seen.insert(pair_key(i, j)).second)
      throw ParseError(line_no, "duplicate row for (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ")");
    max_id = std::max({max_id, i, j});
    rows.push_back({i, j, v});
    row_lines.push_back(line_no);
  }

  const bool is_directed = directed.value_or(header_directed.value_or(true));
  std::size_t n = declared_n ? static_cast<std::size_t>(*declared_n)
                             : static_cast<std::size_t>(max_id + 1);
  if (declared_n && max_id >= *declared_n)
    throw ParseError(line_no, "node id exceeds declared #n=" + std::to_string(*declared_n));

  DyadAlphabet dyads(alphabet, is_directed);
  const int zero = alphabet.zero_label();
  std::unordered_map<std::uint64_t, std::pair<int, int>> pending;
  pending.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const long lo = std::min(row.i, row.j);
    const long hi = std::max(row.i, row.j);
    auto [it, inserted] = pending.try_emplace(pair_key(lo, hi), zero, zero);
    if (!is_directed) {
      if (!inserted) throw ParseError(row_lines[r], "duplicate undirected row");
      it->second = {static_cast<int>(row.v), static_cast<int>(row.v)};
    } else if (row.i < row.j) {
      it->second.first = static_cast<int>(row.v);
    } else {
      it->second.second = static_cast<int>(row.v);
    }
  }

  std::vector<DyadEntry> entries;
  entries.reserve(pending.size());
  for (const auto& [key, value] : pending) {
    const int d = dyads.encode(value.first, value.second);
    if (d == dyads.baseline()) continue;
    entries.push_back({static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xffffffffu),
                       static_cast<std::uint16_t>(d)});
  }
  SparseNetwork network(n, dyads, std::move(entries));
  if (!labels.empty()) {
    std::vector<std::string> table(n);
    for (auto& [id, name] : labels) {
      if (static_cast<std::size_t>(id) >= n) throw ParseError(0, "label for unknown node");
      table[id] = std::move(name);
    }
    network.set_node_labels(std::move(table));
  }
  return network;
}

SparseNetwork load_edge_list_file(const std::string& path, const EdgeAlphabet& alphabet,
                                  std::optional<bool> directed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return load_edge_list(in, alphabet, directed);
}

void save_edge_list(const SparseNetwork& network, std::ostream& out) {
  out << "#n=" << network.n() << '\n';
  if (!network.directed()) out << "#directed=0\n";
  const auto& labels = network.node_labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i].empty()) out << "#label\t" << i << '\t' << labels[i] << '\n';
  }

  const auto& alphabet = network.alphabet();
  const int zero = alphabet.edges().zero_label();
  struct Row {
    NodeId i, j;
    int v;
  };
  std::vector<Row> rows;
  rows.reserve(network.nonbaseline_count() * (network.directed() ? 2 : 1));
  for (const auto& e : network.dyads()) {
    auto [out_v, in_v] = alphabet.labels(e.value);
    if (!network.directed()) {
      rows.push_back({e.i, e.j, out_v});
      continue;
    }
    if (out_v != zero) rows.push_back({e.i, e.j, out_v});
    if (in_v != zero) rows.push_back({e.j, e.i, in_v});
  }
  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  for (const auto& r : rows) out << r.i << '\t' << r.j << '\t' << r.v << '\n';
  if (!out) throw IoError("edge list write failed");
}

}  // namespace blockmix
