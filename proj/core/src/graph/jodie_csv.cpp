#include "tgsl/graph/jodie_csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "tgsl/error.hpp"

namespace tgsl::graph {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void row_error(std::size_t line, const std::string& what) {
  throw DataError("jodie-csv line " + std::to_string(line) + ": " + what);
}

double parse_real(std::string_view field, std::size_t line, std::size_t column) {
  field = trim(field);
  double value = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    row_error(line, "field " + std::to_string(column + 1) + " '" +
                        std::string(field) + "' is not numeric");
  }
  return value;
}

NodeId parse_id(std::string_view field, std::size_t line, std::size_t column) {
  const double v = parse_real(field, line, column);
  if (v < 0 || v != static_cast<double>(static_cast<NodeId>(v))) {
    row_error(line, "field " + std::to_string(column + 1) +
                        " is not a non-negative integer id");
  }
  return static_cast<NodeId>(v);
}

void split_fields(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

void append_real(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

EventStore read_jodie_csv(std::istream& in, ad::Index node_dim) {
  std::string line;
  std::size_t line_no = 0;
  if (std::getline(in, line)) ++line_no;  // header

  std::vector<TemporalEvent> events;
  std::vector<double> features;
  std::vector<std::string_view> fields;
  std::size_t width = 0;
  NodeId max_user = -1, max_item = -1;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    split_fields(line, fields);
    if (fields.size() < 4) {
      row_error(line_no, "expected at least 4 fields, got " +
                             std::to_string(fields.size()));
    }
    if (events.empty()) {
      width = fields.size();
    } else if (fields.size() != width) {
      row_error(line_no, "ragged row: " + std::to_string(fields.size()) +
                             " fields, expected " + std::to_string(width));
    }
    const NodeId user = parse_id(fields[0], line_no, 0);
    const NodeId item = parse_id(fields[1], line_no, 1);
    const double t = parse_real(fields[2], line_no, 2);
    if (t < 0) row_error(line_no, "negative timestamp");
    parse_real(fields[3], line_no, 3);  // state label, unused
    for (std::size_t c = 4; c < fields.size(); ++c) {
      features.push_back(parse_real(fields[c], line_no, c));
    }
    max_user = std::max(max_user, user);
    max_item = std::max(max_item, item);
    events.push_back({user, item, t, static_cast<EventId>(events.size())});
  }

  const NodeId users = max_user + 1;
  const NodeId items = max_item + 1;
  for (auto& e : events) e.dst += users;

  const ad::Index dim = width >= 4 ? static_cast<ad::Index>(width - 4) : 0;
  ad::Matrix edge_features(static_cast<ad::Index>(events.size()), dim);
  std::copy(features.begin(), features.end(), edge_features.data());
  ad::Matrix node_features = ad::Matrix::Zero(users + items, node_dim);
  return EventStore(std::move(events), std::move(node_features),
                    std::move(edge_features), users);
}

EventStore load_jodie_csv(const std::filesystem::path& path,
                          ad::Index node_dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_jodie_csv(in, node_dim);
}

void write_jodie_csv(std::ostream& out, const EventStore& store) {
  if (!store.bipartite()) {
    throw DataError("jodie-csv output requires a bipartite store");
  }
  out << "user_id,item_id,timestamp,state_label,comma_separated_list_of_features\n";
  std::string row;
  for (const auto& e : store.events()) {
    row.clear();
    row += std::to_string(e.src);
    row += ',';
    row += std::to_string(e.dst - store.num_users());
    row += ',';
    append_real(row, e.timestamp);
    row += ",0";
    for (ad::Index c = 0; c < store.edge_dim(); ++c) {
      row += ',';
      append_real(row, store.edge_features()(e.edge_feature_id, c));
    }
    row += '\n';
    out << row;
  }
}

void save_jodie_csv(const std::filesystem::path& path, const EventStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_jodie_csv(out, store);
  out.flush();
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace tgsl::graph
