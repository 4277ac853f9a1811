#pragma once

#include <filesystem>
#include <iosfwd>

#include "tgsl/graph/event_store.hpp"

namespace tgsl::graph {

// JODIE interaction format: a header line (ignored), then rows
//   user_id,item_id,timestamp,state_label,f_1,...,f_D
// User and item ids share one node space with items offset by the user
// count. Node features are zero rows of width `node_dim`.
// Throws DataError naming the line for ragged rows, non-numeric fields and
// negative timestamps.
EventStore read_jodie_csv(std::istream& in, ad::Index node_dim);
EventStore load_jodie_csv(const std::filesystem::path& path,
                          ad::Index node_dim);

// Writes a bipartite store back out in the same format, with shortest
// round-trip decimal formatting.
void write_jodie_csv(std::ostream& out, const EventStore& store);
void save_jodie_csv(const std::filesystem::path& path, const EventStore& store);

}  // namespace tgsl::graph
