#pragma once

// Contact-trace data model: ingestion of contact/session CSVs, canonical
// pairwise contact events, ping-pong filtering, and per-pair inter-contact
// samples. All transformations are pure; traces and tables are immutable
// after construction.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tdtn {

using NodeId = int;
using PairKey = std::pair<NodeId, NodeId>;  // canonical: first < second

inline PairKey make_pair_key(NodeId a, NodeId b) {
  return a < b ? PairKey{a, b} : PairKey{b, a};
}

struct ContactEvent {
  NodeId a = 0;  // a < b
  NodeId b = 0;
  double start = 0.0;  // seconds since trace epoch
  double end = 0.0;    // start <= end
};

struct ApSession {
  NodeId node = 0;
  std::string ap;
  double start = 0.0;
  double end = 0.0;
};

struct ContactTrace {
  std::vector<std::string> labels;   // NodeId -> external label
  std::vector<ContactEvent> events;  // sorted by (start, a, b); per-pair non-overlapping
  double t_begin = 0.0;
  double t_end = 0.0;

  int node_count() const { return static_cast<int>(labels.size()); }
  double horizon_length() const { return t_end - t_begin; }
  std::optional<NodeId> id_of(const std::string& label) const;
};

struct PairSamples {
  std::vector<double> samples;  // inter-contact gaps, seconds, all > 0
  int contact_count = 0;

  bool has_mean() const { return !samples.empty(); }
  double mean() const;  // arithmetic mean of samples; NaN when empty
};

struct InterContactTable {
  std::vector<std::string> labels;  // copied from the source trace
  std::map<PairKey, PairSamples> pairs;

  int node_count() const { return static_cast<int>(labels.size()); }
};

// Gap between successive contacts of a pair. Contacts in real traces have
// durations; the default measures the connectivity gap (next start minus
// previous end). start_to_start is the alternative convention.
enum class GapConvention { end_to_start, start_to_start };

// Raw parsed records. `line` is the 1-based source line, kept for diagnostics.
struct ContactRecord {
  std::string a, b;
  double start = 0.0, end = 0.0;
  std::size_t line = 0;
};

struct SessionRecord {
  std::string node, ap;
  double start = 0.0, end = 0.0;
  std::size_t line = 0;
};

// Input-format failure; carries the offending 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Builds a canonical trace: node ids assigned from the roster when given
// (roster order), otherwise inferred and assigned in lexicographic label
// order; events canonicalized to a < b, sorted, and overlapping or adjacent
// events of a pair merged into one contact.
ContactTrace ingest_contact_trace(const std::vector<ContactRecord>& records,
                                  const std::vector<std::string>* roster = nullptr);

// Canonicalizes events already expressed in node ids (a < b not required);
// the horizon is inferred from the data.
ContactTrace make_canonical_trace(std::vector<std::string> labels,
                                  std::vector<ContactEvent> events);

// Derives contacts from AP association sessions: two nodes are in contact
// whenever their sessions at the same AP intersect. The result is
// canonicalized exactly as in ingest_contact_trace.
ContactTrace sessions_to_contacts(const std::vector<SessionRecord>& sessions,
                                  const std::vector<std::string>* roster = nullptr);

// Per-pair inter-contact gap sequences. Pairs with at least one contact are
// present; a pair needs two contacts to yield a sample.
InterContactTable extract_intercontacts(const ContactTrace& trace,
                                        GapConvention convention = GapConvention::end_to_start);

// Ping-pong filter, drop mode: removes every sample strictly below the
// threshold and recomputes contact counts and means. A pair whose samples all
// fall below the threshold stays in the table with an empty sample list
// (mean undefined, has_mean() == false).
InterContactTable filter_ping_pong(const InterContactTable& table, double threshold = 1800.0);

// Ping-pong filter, merge mode: coalesces successive contacts of a pair whose
// gap (under the given convention) falls below the threshold, cascading until
// every remaining gap clears it.
ContactTrace merge_short_contacts(const ContactTrace& trace, double threshold,
                                  GapConvention convention = GapConvention::end_to_start);

// Pairs with mean inter-contact strictly below max_mean and strictly more
// than min_contacts contacts. Defaults follow one week / 20 contacts.
std::set<PairKey> eligible_pairs(const InterContactTable& table, double max_mean = 604800.0,
                                 int min_contacts = 20);

// ---------------------------------------------------------------------------
// CSV I/O. One record per line, comma separated, one header line; lines
// starting with '#' are metadata comments. Schemas:
//   contact: a,b,start,end
//   session: node,ap,start,end
// A `# horizon,<begin>,<end>` comment overrides the inferred horizon.
// ---------------------------------------------------------------------------

struct ContactCsv {
  std::vector<ContactRecord> records;
  std::optional<std::pair<double, double>> horizon;
  std::map<std::string, std::string> metadata;  // remaining '# key,value' comments
};

ContactCsv read_contact_csv(std::istream& in);
std::vector<SessionRecord> read_session_csv(std::istream& in);

// Re-emits a canonical trace in the contact schema (sorted, labels as names).
// `metadata` entries are written as '# key,value' comments before the header.
void write_contact_csv(std::ostream& out, const ContactTrace& trace,
                       const std::vector<std::pair<std::string, std::string>>& metadata = {});

// Table schema: i,j,count,mean_seconds (labels; empty mean field when
// undefined). Sample dump schema: i,j,delta_seconds.
void write_intercontact_table(std::ostream& out, const InterContactTable& table);
void write_intercontact_samples(std::ostream& out, const InterContactTable& table);

ContactTrace load_contact_trace(const std::string& path,
                                const std::vector<std::string>* roster = nullptr);
ContactTrace load_session_trace(const std::string& path,
                                const std::vector<std::string>* roster = nullptr);

}  // namespace tdtn
