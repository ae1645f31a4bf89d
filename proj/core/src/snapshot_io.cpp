#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "tsbm/errors.hpp"
#include "tsbm/sbm.hpp"

namespace tsbm {

namespace {

using Kind = FormatError::Kind;

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r') ++pos;
    if (pos > start) tokens.push_back(line.substr(start, pos - start));
  }
  return tokens;
}

template <typename Int>
bool parse_int(std::string_view token, Int& out) {
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool is_blank_or_comment(const std::vector<std::string_view>& tokens) {
  return tokens.empty() || tokens.front().front() == '#';
}

std::string labels_line(const Labelling& labels) {
  std::string s = "labels";
  for (int l : labels.labels) {
    s += ' ';
    s += std::to_string(l + 1);
  }
  return s;
}

Labelling parse_labels(const std::vector<std::string_view>& tokens,
                       std::size_t expected, std::size_t line_no) {
  if (tokens.size() != expected + 1) {
    throw FormatError(Kind::kMalformedLine, line_no,
                      "labels line has " + std::to_string(tokens.size() - 1) +
                          " entries, expected " + std::to_string(expected));
  }
  Labelling out(std::vector<int>(expected, 0), 1);
  for (std::size_t k = 0; k < expected; ++k) {
    int l = 0;
    if (!parse_int(tokens[k + 1], l)) {
      throw FormatError(Kind::kMalformedLine, line_no, "label is not an integer");
    }
    if (l < 1) {
      throw FormatError(Kind::kIndexOutOfRange, line_no, "labels are 1-based");
    }
    out.labels[k] = l - 1;
    out.K = std::max(out.K, l);
  }
  return out;
}

}  // namespace

void write_snapshots(const std::filesystem::path& path, const SnapshotArray& x,
                     const Labelling* labels) {
  std::ofstream out(path);
  if (!out) throw FormatError(Kind::kIo, 0, "cannot open " + path.string());
  out << "tsbm 1 " << x.N() << ' ' << x.T() << '\n';
  if (labels != nullptr) {
    if (labels->size() != x.N()) throw std::invalid_argument("labels length != N");
    out << labels_line(*labels) << '\n';
  }
  std::string buffer;
  for (std::size_t t = 0; t < x.T(); ++t) {
    for (std::size_t i = 0; i < x.N(); ++i) {
      for (std::size_t j = i + 1; j < x.N(); ++j) {
        const std::uint8_t s = x.at(t, i, j);
        if (s == 0) continue;
        buffer.clear();
        buffer += "e " + std::to_string(t + 1) + ' ' + std::to_string(i) + ' ' +
                  std::to_string(j);
        if (s != 1) buffer += ' ' + std::to_string(s);
        out << buffer << '\n';
      }
    }
  }
  if (!out) throw FormatError(Kind::kIo, 0, "write failed for " + path.string());
}

SnapshotFile read_snapshots(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(Kind::kIo, 0, "cannot open " + path.string());

  struct Edge {
    std::size_t t, i, j;
    unsigned symbol;
    std::size_t line;
  };
  std::vector<Edge> edges;
  std::optional<Labelling> labels;
  std::size_t N = 0;
  std::size_t T = 0;
  bool have_header = false;
  unsigned max_symbol = 1;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split(line);
    if (is_blank_or_comment(tokens)) continue;
    if (!have_header) {
      int version = 0;
      if (tokens.size() != 4 || tokens[0] != "tsbm" || !parse_int(tokens[1], version) ||
          version != 1 || !parse_int(tokens[2], N) || !parse_int(tokens[3], T)) {
        throw FormatError(Kind::kMalformedHeader, line_no,
                          "expected header `tsbm 1 N T`");
      }
      have_header = true;
      continue;
    }
    if (tokens[0] == "labels") {
      if (labels) throw FormatError(Kind::kMalformedLine, line_no, "second labels line");
      labels = parse_labels(tokens, N, line_no);
      continue;
    }
    if (tokens[0] != "e" || (tokens.size() != 4 && tokens.size() != 5)) {
      throw FormatError(Kind::kMalformedLine, line_no, "expected `e t i j [s]`");
    }
    Edge e{0, 0, 0, 1, line_no};
    if (!parse_int(tokens[1], e.t) || !parse_int(tokens[2], e.i) ||
        !parse_int(tokens[3], e.j) ||
        (tokens.size() == 5 && !parse_int(tokens[4], e.symbol))) {
      throw FormatError(Kind::kMalformedLine, line_no, "non-integer field");
    }
    if (e.t < 1 || e.t > T || e.i >= N || e.j >= N) {
      throw FormatError(Kind::kIndexOutOfRange, line_no, "index out of range");
    }
    if (e.i == e.j) throw FormatError(Kind::kSelfLoop, line_no, "self-loop");
    if (e.symbol < 1 || e.symbol > 255) {
      throw FormatError(Kind::kIndexOutOfRange, line_no, "symbol outside 1..255");
    }
    if (e.i > e.j) std::swap(e.i, e.j);
    max_symbol = std::max(max_symbol, e.symbol);
    edges.push_back(e);
    edges.back().t = e.t - 1;
  }
  if (!have_header) throw FormatError(Kind::kMalformedHeader, line_no, "missing header");

  SnapshotFile file{SnapshotArray(N, T, static_cast<int>(max_symbol) + 1), labels};
  std::vector<bool> seen(file.array.pair_count() * T, false);
  for (const Edge& e : edges) {
    const std::size_t slot = file.array.pair_index(e.i, e.j) * T + e.t;
    if (seen[slot]) {
      throw FormatError(Kind::kDuplicateEdge, e.line,
                        "edge (t=" + std::to_string(e.t + 1) + ", " +
                            std::to_string(e.i) + ", " + std::to_string(e.j) +
                            ") repeated");
    }
    seen[slot] = true;
    file.array.set(e.t, e.i, e.j, static_cast<std::uint8_t>(e.symbol));
  }
  return file;
}

void write_labels(const std::filesystem::path& path, const Labelling& labels) {
  std::ofstream out(path);
  if (!out) throw FormatError(Kind::kIo, 0, "cannot open " + path.string());
  out << labels_line(labels) << '\n';
  if (!out) throw FormatError(Kind::kIo, 0, "write failed for " + path.string());
}

Labelling read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(Kind::kIo, 0, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split(line);
    if (is_blank_or_comment(tokens)) continue;
    if (tokens[0] != "labels") {
      throw FormatError(Kind::kMalformedLine, line_no, "expected `labels ...`");
    }
    return parse_labels(tokens, tokens.size() - 1, line_no);
  }
  throw FormatError(Kind::kMalformedLine, line_no, "no labels line");
}

}  // namespace tsbm
