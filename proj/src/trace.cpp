#include "tdtn/trace.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace tdtn {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_seconds(const std::string& field, std::size_t line, const char* what) {
  const std::string t = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw ParseError(line, std::string("cannot parse ") + what + " '" + field + "' as seconds");
  if (!(value >= 0.0)) throw ParseError(line, std::string(what) + " must be non-negative");
  return value;
}

std::string format_seconds(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Node ids: roster order when a roster is given, lexicographic label order
// otherwise. Lexicographic assignment makes re-ingestion of an emitted trace
// reproduce the same ids regardless of event order.
class NodeIndex {
 public:
  explicit NodeIndex(const std::vector<std::string>* roster) : fixed_(roster != nullptr) {
    if (roster) {
      labels_ = *roster;
      for (std::size_t i = 0; i < labels_.size(); ++i) ids_[labels_[i]] = static_cast<NodeId>(i);
    }
  }

  void see(const std::string& label, std::size_t line) {
    if (fixed_) {
      if (!ids_.count(label)) throw ParseError(line, "unknown node '" + label + "' (not in roster)");
      return;
    }
    ids_.emplace(label, -1);
  }

  void finalize() {
    if (fixed_) return;
    labels_.clear();
    labels_.reserve(ids_.size());
    for (const auto& [label, _] : ids_) labels_.push_back(label);
    std::sort(labels_.begin(), labels_.end());
    for (std::size_t i = 0; i < labels_.size(); ++i) ids_[labels_[i]] = static_cast<NodeId>(i);
  }

  NodeId id(const std::string& label) const { return ids_.at(label); }
  std::vector<std::string> take_labels() { return std::move(labels_); }

 private:
  bool fixed_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> ids_;
};

void sort_canonical(std::vector<ContactEvent>& events) {
  std::sort(events.begin(), events.end(), [](const ContactEvent& x, const ContactEvent& y) {
    if (x.start != y.start) return x.start < y.start;
    if (x.a != y.a) return x.a < y.a;
    if (x.b != y.b) return x.b < y.b;
    return x.end < y.end;
  });
}

// Merges overlapping or adjacent events per pair, then sorts canonically and
// sets the horizon from the data.
ContactTrace canonicalize(std::vector<std::string> labels, std::vector<ContactEvent> raw) {
  std::map<PairKey, std::vector<ContactEvent>> per_pair;
  for (const ContactEvent& ev : raw) per_pair[{ev.a, ev.b}].push_back(ev);

  ContactTrace trace;
  trace.labels = std::move(labels);
  for (auto& [key, evs] : per_pair) {
    std::sort(evs.begin(), evs.end(), [](const ContactEvent& x, const ContactEvent& y) {
      return x.start != y.start ? x.start < y.start : x.end < y.end;
    });
    ContactEvent current = evs.front();
    for (std::size_t k = 1; k < evs.size(); ++k) {
      if (evs[k].start <= current.end) {
        current.end = std::max(current.end, evs[k].end);
      } else {
        trace.events.push_back(current);
        current = evs[k];
      }
    }
    trace.events.push_back(current);
  }
  sort_canonical(trace.events);

  if (!trace.events.empty()) {
    trace.t_begin = trace.events.front().start;
    trace.t_end = 0.0;
    for (const ContactEvent& ev : trace.events) trace.t_end = std::max(trace.t_end, ev.end);
  }
  return trace;
}

}  // namespace

ContactTrace make_canonical_trace(std::vector<std::string> labels,
                                  std::vector<ContactEvent> events) {
  for (ContactEvent& ev : events) {
    if (ev.a == ev.b) throw std::invalid_argument("self contact");
    if (ev.start > ev.end) throw std::invalid_argument("contact start after end");
    if (ev.a > ev.b) std::swap(ev.a, ev.b);
  }
  return canonicalize(std::move(labels), std::move(events));
}

std::optional<NodeId> ContactTrace::id_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<NodeId>(i);
  return std::nullopt;
}

double PairSamples::mean() const {
  if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (double s : samples) sum += s;
  return sum / static_cast<double>(samples.size());
}

ContactTrace ingest_contact_trace(const std::vector<ContactRecord>& records,
                                  const std::vector<std::string>* roster) {
  NodeIndex index(roster);
  for (const ContactRecord& r : records) {
    index.see(r.a, r.line);
    index.see(r.b, r.line);
  }
  index.finalize();

  std::vector<ContactEvent> events;
  events.reserve(records.size());
  for (const ContactRecord& r : records) {
    if (r.a == r.b) throw ParseError(r.line, "self contact '" + r.a + "'");
    if (r.start > r.end) throw ParseError(r.line, "contact start after end");
    const NodeId ia = index.id(r.a);
    const NodeId ib = index.id(r.b);
    ContactEvent ev;
    ev.a = std::min(ia, ib);
    ev.b = std::max(ia, ib);
    ev.start = r.start;
    ev.end = r.end;
    events.push_back(ev);
  }
  return canonicalize(index.take_labels(), std::move(events));
}

ContactTrace sessions_to_contacts(const std::vector<SessionRecord>& sessions,
                                  const std::vector<std::string>* roster) {
  NodeIndex index(roster);
  for (const SessionRecord& s : sessions) {
    if (s.start > s.end) throw ParseError(s.line, "session start after end");
    index.see(s.node, s.line);
  }
  index.finalize();

  struct Visit {
    NodeId node;
    double start, end;
  };
  std::map<std::string, std::vector<Visit>> by_ap;
  for (const SessionRecord& s : sessions)
    by_ap[s.ap].push_back({index.id(s.node), s.start, s.end});

  std::vector<ContactEvent> events;
  for (auto& [ap, visits] : by_ap) {
    std::sort(visits.begin(), visits.end(), [](const Visit& x, const Visit& y) {
      return x.start != y.start ? x.start < y.start : x.node < y.node;
    });
    for (std::size_t i = 0; i < visits.size(); ++i) {
      for (std::size_t j = i + 1; j < visits.size(); ++j) {
        if (visits[j].start > visits[i].end) break;  // sorted by start: no later overlap
        if (visits[j].node == visits[i].node) continue;
        ContactEvent ev;
        ev.a = std::min(visits[i].node, visits[j].node);
        ev.b = std::max(visits[i].node, visits[j].node);
        ev.start = std::max(visits[i].start, visits[j].start);
        ev.end = std::min(visits[i].end, visits[j].end);
        events.push_back(ev);
      }
    }
  }
  return canonicalize(index.take_labels(), std::move(events));
}

InterContactTable extract_intercontacts(const ContactTrace& trace, GapConvention convention) {
  InterContactTable table;
  table.labels = trace.labels;
  for (const ContactEvent& ev : trace.events) {
    PairSamples& ps = table.pairs[{ev.a, ev.b}];
    ++ps.contact_count;
  }
  std::map<PairKey, const ContactEvent*> previous;
  for (const ContactEvent& ev : trace.events) {
    auto [it, fresh] = previous.emplace(PairKey{ev.a, ev.b}, &ev);
    if (!fresh) {
      const ContactEvent* prev = it->second;
      const double gap = convention == GapConvention::end_to_start ? ev.start - prev->end
                                                                   : ev.start - prev->start;
      assert(gap > 0.0);
      table.pairs[{ev.a, ev.b}].samples.push_back(gap);
      it->second = &ev;
    }
  }
  return table;
}

InterContactTable filter_ping_pong(const InterContactTable& table, double threshold) {
  if (threshold < 0.0) throw std::invalid_argument("ping-pong threshold must be >= 0");
  InterContactTable out;
  out.labels = table.labels;
  for (const auto& [key, ps] : table.pairs) {
    PairSamples kept;
    for (double s : ps.samples)
      if (s >= threshold) kept.samples.push_back(s);
    kept.contact_count = ps.contact_count == 0 ? 0 : static_cast<int>(kept.samples.size()) + 1;
    out.pairs.emplace(key, std::move(kept));
  }
  return out;
}

ContactTrace merge_short_contacts(const ContactTrace& trace, double threshold,
                                  GapConvention convention) {
  if (threshold < 0.0) throw std::invalid_argument("ping-pong threshold must be >= 0");
  std::map<PairKey, std::vector<ContactEvent>> per_pair;
  for (const ContactEvent& ev : trace.events) per_pair[{ev.a, ev.b}].push_back(ev);

  ContactTrace out;
  out.labels = trace.labels;
  out.t_begin = trace.t_begin;
  out.t_end = trace.t_end;
  for (auto& [key, evs] : per_pair) {
    ContactEvent current = evs.front();
    for (std::size_t k = 1; k < evs.size(); ++k) {
      const double gap = convention == GapConvention::end_to_start
                             ? evs[k].start - current.end
                             : evs[k].start - current.start;
      if (gap < threshold) {
        current.end = std::max(current.end, evs[k].end);
      } else {
        out.events.push_back(current);
        current = evs[k];
      }
    }
    out.events.push_back(current);
  }
  sort_canonical(out.events);
  return out;
}

std::set<PairKey> eligible_pairs(const InterContactTable& table, double max_mean,
                                 int min_contacts) {
  if (!(max_mean > 0.0)) throw std::invalid_argument("max_mean must be > 0");
  if (min_contacts < 0) throw std::invalid_argument("min_contacts must be >= 0");
  std::set<PairKey> result;
  for (const auto& [key, ps] : table.pairs) {
    if (!ps.has_mean()) continue;
    if (ps.mean() < max_mean && ps.contact_count > min_contacts) result.insert(key);
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV I/O
// ---------------------------------------------------------------------------

namespace {

// Reads comment metadata and returns data lines with their line numbers.
struct CsvLines {
  std::vector<std::pair<std::size_t, std::string>> data;
  std::map<std::string, std::string> metadata;
};

CsvLines read_lines(std::istream& in) {
  CsvLines out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto fields = split_csv(trim(line.substr(1)));
      if (!fields.empty() && !fields[0].empty()) {
        std::string value;
        for (std::size_t i = 1; i < fields.size(); ++i) {
          if (i > 1) value += ',';
          value += fields[i];
        }
        out.metadata[trim(fields[0])] = value;
      }
      continue;
    }
    out.data.emplace_back(number, line);
  }
  return out;
}

}  // namespace

ContactCsv read_contact_csv(std::istream& in) {
  CsvLines lines = read_lines(in);
  ContactCsv out;
  out.metadata = lines.metadata;
  if (auto it = lines.metadata.find("horizon"); it != lines.metadata.end()) {
    const auto fields = split_csv(it->second);
    if (fields.size() == 2)
      out.horizon = {parse_seconds(fields[0], 0, "horizon begin"),
                     parse_seconds(fields[1], 0, "horizon end")};
    out.metadata.erase("horizon");
  }
  bool header_seen = false;
  for (const auto& [number, line] : lines.data) {
    if (!header_seen) {
      header_seen = true;  // first data line is the header
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 4) throw ParseError(number, "expected 4 fields a,b,start,end");
    ContactRecord r;
    r.a = trim(fields[0]);
    r.b = trim(fields[1]);
    if (r.a.empty() || r.b.empty()) throw ParseError(number, "empty node label");
    r.start = parse_seconds(fields[2], number, "start");
    r.end = parse_seconds(fields[3], number, "end");
    r.line = number;
    out.records.push_back(std::move(r));
  }
  return out;
}

std::vector<SessionRecord> read_session_csv(std::istream& in) {
  CsvLines lines = read_lines(in);
  std::vector<SessionRecord> records;
  bool header_seen = false;
  for (const auto& [number, line] : lines.data) {
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 4) throw ParseError(number, "expected 4 fields node,ap,start,end");
    SessionRecord r;
    r.node = trim(fields[0]);
    r.ap = trim(fields[1]);
    if (r.node.empty() || r.ap.empty()) throw ParseError(number, "empty node or AP label");
    r.start = parse_seconds(fields[2], number, "start");
    r.end = parse_seconds(fields[3], number, "end");
    r.line = number;
    records.push_back(std::move(r));
  }
  return records;
}

void write_contact_csv(std::ostream& out, const ContactTrace& trace,
                       const std::vector<std::pair<std::string, std::string>>& metadata) {
  for (const auto& [key, value] : metadata) out << "# " << key << ',' << value << '\n';
  out << "# horizon," << format_seconds(trace.t_begin) << ',' << format_seconds(trace.t_end)
      << '\n';
  out << "a,b,start,end\n";
  for (const ContactEvent& ev : trace.events)
    out << trace.labels[ev.a] << ',' << trace.labels[ev.b] << ',' << format_seconds(ev.start)
        << ',' << format_seconds(ev.end) << '\n';
}

void write_intercontact_table(std::ostream& out, const InterContactTable& table) {
  out << "i,j,count,mean_seconds\n";
  for (const auto& [key, ps] : table.pairs) {
    out << table.labels[key.first] << ',' << table.labels[key.second] << ',' << ps.contact_count
        << ',';
    if (ps.has_mean()) out << format_seconds(ps.mean());
    out << '\n';
  }
}

void write_intercontact_samples(std::ostream& out, const InterContactTable& table) {
  out << "i,j,delta_seconds\n";
  for (const auto& [key, ps] : table.pairs)
    for (double s : ps.samples)
      out << table.labels[key.first] << ',' << table.labels[key.second] << ','
          << format_seconds(s) << '\n';
}

namespace {

ContactTrace apply_horizon(ContactTrace trace, const std::optional<std::pair<double, double>>& h) {
  if (!h) return trace;
  for (const ContactEvent& ev : trace.events)
    if (ev.start < h->first || ev.end > h->second)
      throw std::invalid_argument("declared horizon does not cover all events");
  trace.t_begin = h->first;
  trace.t_end = h->second;
  return trace;
}

}  // namespace

ContactTrace load_contact_trace(const std::string& path, const std::vector<std::string>* roster) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  ContactCsv csv = read_contact_csv(in);
  return apply_horizon(ingest_contact_trace(csv.records, roster), csv.horizon);
}

ContactTrace load_session_trace(const std::string& path, const std::vector<std::string>* roster) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return sessions_to_contacts(read_session_csv(in), roster);
}

}  // namespace tdtn
