#include "des/event_store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "des/canonical.hpp"
#include "des/merkle.hpp"

namespace des {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kEventsSuffix = ".events.ndjson";
constexpr std::string_view kIndexSuffix = ".events.idx";
constexpr std::string_view kEnrichSuffix = ".enrich.ndjson";
constexpr std::string_view kCheckpointFile = "checkpoints.ndjson";
constexpr std::string_view kPrunedFile = "pruned.json";

[[noreturn]] void io_fail(const std::string& what, const fs::path& path) {
  throw Error(ErrorCode::io_error, what + " " + path.string() + ": " + std::strerror(errno));
}

std::string segment_stem(std::uint32_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08u", n);
  return buf;
}

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Fd() { reset(); }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }

 private:
  int fd_ = -1;
};

Fd open_append(const fs::path& path) {
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) io_fail("cannot open", path);
  return Fd(fd);
}

// Writes all of `data`; returns false on error.
bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Splits LF-terminated content; bytes after the last LF are reported via
// `tail` and not returned as a line.
std::vector<std::string> split_lines(std::string_view content, std::string_view* tail = nullptr) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (true) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) break;
    lines.emplace_back(content.substr(pos, nl - pos));
    pos = nl + 1;
  }
  if (tail) *tail = content.substr(pos);
  return lines;
}

// Committed length of an NDJSON file: up to and including its last LF.
std::uint64_t committed_length(const std::string& content) {
  auto nl = content.rfind('\n');
  return nl == std::string::npos ? 0 : nl + 1;
}

void truncate_to(const fs::path& path, std::uint64_t size) {
  if (::truncate(path.c_str(), static_cast<off_t>(size)) != 0) io_fail("cannot truncate", path);
}

// Loads an NDJSON side file, dropping (and unless read_only, truncating) a
// partial trailing line.
std::vector<std::string> load_ndjson(const fs::path& path, bool read_only) {
  if (!fs::exists(path)) return {};
  std::string content = slurp(path);
  auto keep = committed_length(content);
  if (keep != content.size() && !read_only) truncate_to(path, keep);
  return split_lines(std::string_view(content).substr(0, keep));
}

struct IndexEntry {
  std::uint64_t sequence = 0;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  std::string decision_id;
};

std::string index_line(const IndexEntry& e) {
  return std::to_string(e.sequence) + " " + std::to_string(e.offset) + " " + std::to_string(e.length) + " " +
         e.decision_id + "\n";
}

std::optional<IndexEntry> parse_index_line(std::string_view line) {
  IndexEntry e;
  const char* p = line.data();
  const char* end = line.data() + line.size();
  for (std::uint64_t* field : {&e.sequence, &e.offset, &e.length}) {
    auto [next, ec] = std::from_chars(p, end, *field);
    if (ec != std::errc{} || next == end || *next != ' ') return std::nullopt;
    p = next + 1;
  }
  e.decision_id.assign(p, end);
  return e;
}

}  // namespace

std::string encode_stream_name(std::string_view system_id) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (std::size_t i = 0; i < system_id.size(); ++i) {
    auto c = static_cast<unsigned char>(system_id[i]);
    bool safe = std::isalnum(c) || c == '_' || c == '-' || (c == '.' && i > 0);
    if (safe) {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out.empty() ? "%" : out;
}

std::string decode_stream_name(std::string_view name) {
  if (name == "%") return {};
  std::string out;
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (name[i] == '%' && i + 2 < name.size()) {
      unsigned v = 0;
      std::from_chars(name.data() + i + 1, name.data() + i + 3, v, 16);
      out += static_cast<char>(v);
      i += 2;
    } else {
      out += name[i];
    }
  }
  return out;
}

std::string default_stream_for(const DecisionEvent& event, std::string_view requested) {
  if (!requested.empty()) return std::string(requested);
  if (const std::string* sid = event.system_id(); sid && !sid->empty()) return *sid;
  return "default";
}

Json RetentionReport::to_json() const {
  Json d = Json::array(), r = Json::array();
  for (const auto& p : deleted) d.push_back(p.string());
  for (const auto& p : retained) r.push_back(p.string());
  return {{"deleted", d}, {"retained", r}};
}

// ---- internal state ---------------------------------------------------------

struct EventStore::Segment {
  std::uint32_t number = 0;
  fs::path events_path;
  fs::path index_path;
  fs::path enrich_path;
  std::uint64_t size = 0;  // committed bytes
  std::uint64_t first_sequence = 0;
  std::uint64_t last_sequence = 0;
  std::size_t count = 0;
};

struct EventStore::Stream {
  std::string system_id;
  fs::path dir;
  std::vector<Segment> segments;
  struct Slot {
    std::uint32_t segment;
    std::uint64_t offset;
    std::uint64_t length;
  };
  std::map<std::uint64_t, Slot> by_seq;
  ChainAnchor anchor;
  std::uint64_t last_sequence = 0;
  std::string last_hash = kGenesisHash;
  std::vector<Checkpoint> checkpoints;

  std::mutex write_mu;
  Fd events_fd;  // active segment
  Fd index_fd;
  std::uint32_t open_segment = 0;
  bool dirty = false;  // a failed write may have left a partial line

  Segment* find_segment(std::uint32_t n) {
    for (auto& s : segments) {
      if (s.number == n) return &s;
    }
    return nullptr;
  }
  const Segment* find_segment(std::uint32_t n) const {
    return const_cast<Stream*>(this)->find_segment(n);
  }
};

// ---- open / recovery ----------------------------------------------------------

EventStore::EventStore(fs::path root, StoreOptions options) : root_(std::move(root)), options_(options) {
  std::error_code ec;
  if (!options_.read_only) {
    fs::create_directories(root_, ec);
    if (ec) throw Error(ErrorCode::io_error, "cannot create store root " + root_.string() + ": " + ec.message());
  } else if (!fs::is_directory(root_)) {
    throw Error(ErrorCode::io_error, "store root " + root_.string() + " does not exist");
  }
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) load_stream(d);
}

EventStore::~EventStore() = default;

void EventStore::load_stream(const fs::path& dir) {
  auto stream = std::make_unique<Stream>();
  stream->dir = dir;
  stream->system_id = decode_stream_name(dir.filename().string());

  if (fs::exists(dir / kPrunedFile)) {
    try {
      Json j = parse_json(slurp(dir / kPrunedFile));
      stream->anchor.last_sequence = j.at("last_sequence").get<std::uint64_t>();
      stream->anchor.last_hash = j.at("last_hash").get<std::string>();
    } catch (const std::exception& e) {
      throw Error(ErrorCode::io_error, "unreadable " + (dir / kPrunedFile).string() + ": " + e.what());
    }
  }
  stream->last_sequence = stream->anchor.last_sequence;
  stream->last_hash = stream->anchor.last_hash;

  std::vector<std::uint32_t> numbers;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.size() == 8 + kEventsSuffix.size() && name.ends_with(kEventsSuffix)) {
      std::uint32_t n = 0;
      auto [p, ec] = std::from_chars(name.data(), name.data() + 8, n);
      if (ec == std::errc{} && p == name.data() + 8) numbers.push_back(n);
    }
  }
  std::sort(numbers.begin(), numbers.end());

  for (std::uint32_t n : numbers) {
    Segment seg;
    seg.number = n;
    seg.events_path = dir / (segment_stem(n) + std::string(kEventsSuffix));
    seg.index_path = dir / (segment_stem(n) + std::string(kIndexSuffix));
    seg.enrich_path = dir / (segment_stem(n) + std::string(kEnrichSuffix));

    std::string content = slurp(seg.events_path);
    seg.size = committed_length(content);
    if (seg.size != content.size() && !options_.read_only) truncate_to(seg.events_path, seg.size);
    std::string_view body = std::string_view(content).substr(0, seg.size);

    // Trust the sidecar only when it accounts for every committed byte.
    std::vector<IndexEntry> entries;
    bool index_ok = fs::exists(seg.index_path);
    if (index_ok) {
      std::uint64_t expect = 0;
      for (const auto& line : load_ndjson(seg.index_path, options_.read_only)) {
        auto e = parse_index_line(line);
        if (!e || e->offset != expect) {
          index_ok = false;
          break;
        }
        expect = e->offset + e->length + 1;
        entries.push_back(std::move(*e));
      }
      index_ok = index_ok && expect == seg.size;
    }
    if (!index_ok) {
      entries.clear();
      std::uint64_t offset = 0;
      for (const auto& line : split_lines(body)) {
        IndexEntry e;
        e.offset = offset;
        e.length = line.size();
        offset += line.size() + 1;
        try {
          DecisionEvent ev = event_from_json(parse_json(line));
          if (!ev.sequence_number()) continue;
          e.sequence = *ev.sequence_number();
          e.decision_id = ev.decision_id() ? *ev.decision_id() : std::string();
        } catch (const Error&) {
          continue;  // left for verification to report
        }
        entries.push_back(std::move(e));
      }
      if (!options_.read_only) {
        std::string out;
        for (const auto& e : entries) out += index_line(e);
        std::ofstream(seg.index_path, std::ios::binary | std::ios::trunc) << out;
      }
    }

    for (const auto& e : entries) {
      if (stream->by_seq.count(e.sequence)) continue;
      stream->by_seq[e.sequence] = {n, e.offset, e.length};
      if (!e.decision_id.empty() && !by_decision_.count(e.decision_id)) {
        by_decision_[e.decision_id] = {stream->system_id, n, e.offset, e.length};
      }
      if (seg.count == 0) seg.first_sequence = e.sequence;
      seg.last_sequence = e.sequence;
      ++seg.count;
    }

    for (const auto& line : load_ndjson(seg.enrich_path, options_.read_only)) {
      try {
        auto rec = EnrichmentRecord::from_json(parse_json(line));
        enrichments_[rec.decision_id].push_back(std::move(rec));
      } catch (const Error&) {
        // unreadable enrichment lines are skipped
      }
    }
    stream->segments.push_back(std::move(seg));
  }

  for (const auto& line : load_ndjson(dir / kCheckpointFile, options_.read_only)) {
    try {
      stream->checkpoints.push_back(Checkpoint::from_json(parse_json(line)));
    } catch (const Error&) {
    }
  }

  // Chain tip from the highest stored sequence.
  if (!stream->by_seq.empty()) {
    auto [seq, slot] = *stream->by_seq.rbegin();
    const Segment* seg = stream->find_segment(slot.segment);
    std::string content = slurp(seg->events_path);
    std::string line = content.substr(slot.offset, slot.length);
    try {
      DecisionEvent last = event_from_json(parse_json(line));
      stream->last_sequence = seq;
      if (last.current_hash()) stream->last_hash = *last.current_hash();
    } catch (const Error&) {
      stream->last_sequence = seq;
    }
  }

  std::string key = stream->system_id;
  streams_.emplace(std::move(key), std::move(stream));
}

// ---- writes -------------------------------------------------------------------

EventStore::Stream& EventStore::stream_for_write(const std::string& system_id) {
  if (options_.read_only) throw Error(ErrorCode::io_error, "store opened read-only");
  {
    std::shared_lock lock(mu_);
    if (auto it = streams_.find(system_id); it != streams_.end()) return *it->second;
  }
  std::unique_lock lock(mu_);
  if (auto it = streams_.find(system_id); it != streams_.end()) return *it->second;
  auto stream = std::make_unique<Stream>();
  stream->system_id = system_id;
  stream->dir = root_ / encode_stream_name(system_id);
  std::error_code ec;
  fs::create_directories(stream->dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + stream->dir.string() + ": " + ec.message());
  Stream& ref = *stream;
  streams_.emplace(system_id, std::move(stream));
  return ref;
}

RecordLocation EventStore::append_record(const DecisionEvent& sealed, std::string_view requested) {
  if (!sealed.is_sealed() || !sealed.sequence_number()) {
    throw Error(ErrorCode::reject_unsealed, "only sealed events can be stored",
                "temporal_metadata.hash_chain.current_hash");
  }
  const std::string system_id = default_stream_for(sealed, requested);
  const std::uint64_t seq = *sealed.sequence_number();
  const std::string decision_id = sealed.decision_id() ? *sealed.decision_id() : std::string();
  const std::string line = canonicalize(event_to_json(sealed));

  Stream& s = stream_for_write(system_id);
  std::lock_guard write_lock(s.write_mu);

  {
    std::shared_lock lock(mu_);
    if (s.by_seq.count(seq) || (seq <= s.anchor.last_sequence && s.anchor.last_sequence > 0)) {
      throw Error(ErrorCode::duplicate_sequence,
                  "stream '" + system_id + "' already holds sequence " + std::to_string(seq), "temporal_metadata.sequence_number");
    }
    if (!decision_id.empty() && by_decision_.count(decision_id)) {
      throw Error(ErrorCode::duplicate_decision, "decision_id " + decision_id + " is already stored",
                  "decision_context.decision_id");
    }
  }

  // Pick (or roll over to) the active segment.
  std::uint32_t number;
  std::uint64_t offset;
  fs::path events_path, index_path;
  {
    std::unique_lock lock(mu_);
    if (s.segments.empty() ||
        (s.segments.back().size > 0 && s.segments.back().size + line.size() + 1 > options_.max_segment_bytes)) {
      Segment seg;
      seg.number = s.segments.empty() ? 1 : s.segments.back().number + 1;
      seg.events_path = s.dir / (segment_stem(seg.number) + std::string(kEventsSuffix));
      seg.index_path = s.dir / (segment_stem(seg.number) + std::string(kIndexSuffix));
      seg.enrich_path = s.dir / (segment_stem(seg.number) + std::string(kEnrichSuffix));
      s.segments.push_back(std::move(seg));
    }
    const Segment& active = s.segments.back();
    number = active.number;
    offset = active.size;
    events_path = active.events_path;
    index_path = active.index_path;
  }

  if (!s.events_fd || s.open_segment != number) {
    s.events_fd = open_append(events_path);
    s.index_fd = open_append(index_path);
    s.open_segment = number;
  }
  if (s.dirty) {
    if (::ftruncate(s.events_fd.get(), static_cast<off_t>(offset)) != 0) io_fail("cannot truncate", events_path);
    s.dirty = false;
  }

  std::string record = line;
  record += '\n';
  if (options_.fault_after_bytes) {
    std::size_t n = std::min(*options_.fault_after_bytes, record.size());
    options_.fault_after_bytes.reset();
    write_all(s.events_fd.get(), std::string_view(record).substr(0, n));
    s.dirty = true;
    throw Error(ErrorCode::io_error, "injected write fault after " + std::to_string(n) + " bytes");
  }
  if (!write_all(s.events_fd.get(), record)) {
    s.dirty = true;
    io_fail("cannot write", events_path);
  }
  IndexEntry ie{seq, offset, line.size(), decision_id};
  if (!write_all(s.index_fd.get(), index_line(ie))) io_fail("cannot write", index_path);
  if (options_.durability == Durability::fsync) {
    if (::fsync(s.events_fd.get()) != 0) io_fail("cannot fsync", events_path);
    ::fsync(s.index_fd.get());
  }

  RecordLocation loc{system_id, number, offset, line.size()};
  {
    std::unique_lock lock(mu_);
    Segment& active = s.segments.back();
    active.size += record.size();
    if (active.count == 0) active.first_sequence = seq;
    active.last_sequence = seq;
    ++active.count;
    s.by_seq[seq] = {number, offset, line.size()};
    if (seq >= s.last_sequence) {
      s.last_sequence = seq;
      s.last_hash = *sealed.current_hash();
    }
    if (!decision_id.empty()) by_decision_[decision_id] = loc;
  }
  return loc;
}

void EventStore::append_enrichment(const EnrichmentRecord& record) {
  auto loc = locate(record.decision_id);
  if (!loc) throw Error(ErrorCode::not_found, "no stored event " + record.decision_id, "decision_id");
  auto target = lookup(record.decision_id);
  if (!target || !verify_link(record, *target)) {
    throw Error(ErrorCode::stale_enrichment, "enrichment link_hash does not match the stored event", "link_hash");
  }
  Stream& s = stream_for_write(loc->system_id);
  std::lock_guard write_lock(s.write_mu);
  fs::path path;
  {
    std::shared_lock lock(mu_);
    path = s.segments.back().enrich_path;
  }
  Fd fd = open_append(path);
  std::string line = canonicalize(record.to_json()) + "\n";
  if (!write_all(fd.get(), line)) io_fail("cannot write", path);
  if (options_.durability == Durability::fsync) ::fsync(fd.get());
  std::unique_lock lock(mu_);
  enrichments_[record.decision_id].push_back(record);
}

void EventStore::append_checkpoint(const Checkpoint& checkpoint) {
  Stream& s = stream_for_write(checkpoint.system_id);
  std::lock_guard write_lock(s.write_mu);
  fs::path path = s.dir / kCheckpointFile;
  Fd fd = open_append(path);
  std::string line = canonicalize(checkpoint.to_json()) + "\n";
  if (!write_all(fd.get(), line)) io_fail("cannot write", path);
  if (options_.durability == Durability::fsync) ::fsync(fd.get());
  std::unique_lock lock(mu_);
  s.checkpoints.push_back(checkpoint);
}

// ---- reads --------------------------------------------------------------------

const EventStore::Stream* EventStore::find_stream(std::string_view system_id) const {
  auto it = streams_.find(system_id);
  return it == streams_.end() ? nullptr : it->second.get();
}

std::string EventStore::read_at(const Stream& s, std::uint32_t segment, std::uint64_t offset,
                                std::uint64_t length) const {
  const Segment* seg = s.find_segment(segment);
  if (!seg) throw Error(ErrorCode::io_error, "segment " + std::to_string(segment) + " missing");
  Fd fd(::open(seg->events_path.c_str(), O_RDONLY | O_CLOEXEC));
  if (!fd) io_fail("cannot open", seg->events_path);
  std::string out(length, '\0');
  std::size_t done = 0;
  while (done < length) {
    ssize_t n = ::pread(fd.get(), out.data() + done, length - done, static_cast<off_t>(offset + done));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) io_fail("cannot read", seg->events_path);
    done += static_cast<std::size_t>(n);
  }
  return out;
}

void EventStore::for_each_line(std::string_view system_id, std::uint64_t from_sequence,
                               const std::function<bool(std::uint64_t, const std::string&)>& fn) const {
  struct Item {
    std::uint64_t seq;
    Stream::Slot slot;
  };
  std::vector<Item> items;
  std::map<std::uint32_t, fs::path> paths;
  {
    std::shared_lock lock(mu_);
    const Stream* s = find_stream(system_id);
    if (!s) return;
    for (auto it = s->by_seq.lower_bound(from_sequence); it != s->by_seq.end(); ++it) {
      items.push_back({it->first, it->second});
    }
    for (const auto& seg : s->segments) paths[seg.number] = seg.events_path;
  }
  std::uint32_t open_number = 0;
  std::string content;
  for (const auto& item : items) {
    if (item.slot.segment != open_number) {
      content = slurp(paths[item.slot.segment]);
      open_number = item.slot.segment;
    }
    if (item.slot.offset + item.slot.length > content.size()) break;
    std::string line = content.substr(item.slot.offset, item.slot.length);
    if (!fn(item.seq, line)) return;
  }
}

std::vector<DecisionEvent> EventStore::scan_stream(std::string_view system_id, std::uint64_t from_sequence) const {
  std::vector<DecisionEvent> out;
  for_each_line(system_id, from_sequence, [&](std::uint64_t, const std::string& line) {
    out.push_back(event_from_json(parse_json(line)));
    return true;
  });
  return out;
}

std::optional<RecordLocation> EventStore::locate(std::string_view decision_id) const {
  std::shared_lock lock(mu_);
  auto it = by_decision_.find(decision_id);
  if (it == by_decision_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> EventStore::lookup_bytes(std::string_view decision_id) const {
  std::shared_lock lock(mu_);
  auto it = by_decision_.find(decision_id);
  if (it == by_decision_.end()) return std::nullopt;
  const Stream* s = find_stream(it->second.system_id);
  if (!s) return std::nullopt;
  return read_at(*s, it->second.segment, it->second.offset, it->second.length);
}

std::optional<DecisionEvent> EventStore::lookup(std::string_view decision_id) const {
  auto bytes = lookup_bytes(decision_id);
  if (!bytes) return std::nullopt;
  return event_from_json(parse_json(*bytes));
}

std::vector<std::string> EventStore::streams() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, s] : streams_) out.push_back(id);
  return out;
}

bool EventStore::has_stream(std::string_view system_id) const {
  std::shared_lock lock(mu_);
  return find_stream(system_id) != nullptr;
}

ChainStreamState EventStore::stream_state(std::string_view system_id) const {
  std::shared_lock lock(mu_);
  ChainStreamState st;
  st.system_id = std::string(system_id);
  if (const Stream* s = find_stream(system_id)) {
    st.last_sequence = s->last_sequence;
    st.last_hash = s->last_hash;
  }
  return st;
}

std::size_t EventStore::event_count(std::string_view system_id) const {
  std::shared_lock lock(mu_);
  const Stream* s = find_stream(system_id);
  return s ? s->by_seq.size() : 0;
}

std::vector<EnrichmentRecord> EventStore::enrichments_for(std::string_view decision_id) const {
  std::shared_lock lock(mu_);
  auto it = enrichments_.find(decision_id);
  if (it == enrichments_.end()) return {};
  return it->second;
}

std::vector<Checkpoint> EventStore::checkpoints(std::string_view system_id) const {
  std::shared_lock lock(mu_);
  const Stream* s = find_stream(system_id);
  return s ? s->checkpoints : std::vector<Checkpoint>{};
}

StoredStream EventStore::read_stored(std::string_view system_id) const {
  StoredStream out;
  out.system_id = std::string(system_id);
  std::vector<Segment> segments;
  fs::path dir;
  {
    std::shared_lock lock(mu_);
    const Stream* s = find_stream(system_id);
    if (!s) return out;
    segments = s->segments;
    dir = s->dir;
    out.anchor = s->anchor;
  }
  for (const auto& seg : segments) {
    std::string content = slurp(seg.events_path);
    std::string_view tail;
    auto lines = split_lines(content, &tail);
    if (!tail.empty()) out.truncated_segments.push_back(seg.number);
    for (auto& l : lines) out.lines.push_back(std::move(l));
  }
  std::string_view tail;
  out.checkpoint_lines = split_lines(slurp(dir / kCheckpointFile), &tail);
  return out;
}

// ---- retention ----------------------------------------------------------------

RetentionReport EventStore::enforce_retention(TimePoint now, bool dry_run) {
  RetentionReport report;
  for (const auto& system_id : streams()) {
    Stream* sp;
    {
      std::shared_lock lock(mu_);
      sp = streams_.find(system_id)->second.get();
    }
    Stream& s = *sp;
    std::lock_guard write_lock(s.write_mu);
    std::vector<Segment> segments;
    {
      std::shared_lock lock(mu_);
      segments = s.segments;
    }
    // Only a leading run of expired segments can go; the chain anchor then
    // moves to the last deleted event.
    std::size_t expired = 0;
    std::optional<ChainAnchor> new_anchor;
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
      bool all_expired = segments[i].count > 0;
      ChainAnchor last;
      for (const auto& line : split_lines(slurp(segments[i].events_path))) {
        try {
          DecisionEvent e = event_from_json(parse_json(line));
          const auto& tm = e.temporal_metadata;
          std::optional<TimePoint> ts = tm && tm->event_timestamp ? parse_timestamp(*tm->event_timestamp) : std::nullopt;
          std::optional<IsoDuration> d;
          if (tm && tm->retention_policy && tm->retention_policy->minimum_retention) {
            d = parse_iso_duration(*tm->retention_policy->minimum_retention);
          }
          if (!ts || !d || add_duration(*ts, *d) > now) all_expired = false;
          if (e.sequence_number() && e.current_hash()) last = {*e.sequence_number(), *e.current_hash()};
        } catch (const Error&) {
          all_expired = false;
        }
        if (!all_expired) break;
      }
      if (!all_expired) break;
      ++expired;
      new_anchor = last;
    }
    for (std::size_t i = 0; i < segments.size(); ++i) {
      (i < expired ? report.deleted : report.retained).push_back(segments[i].events_path);
    }
    if (dry_run || expired == 0) continue;

    Json marker = {{"last_sequence", new_anchor->last_sequence}, {"last_hash", new_anchor->last_hash}};
    std::ofstream(s.dir / kPrunedFile, std::ios::binary | std::ios::trunc) << canonicalize(marker) << "\n";
    std::unique_lock lock(mu_);
    std::set<std::uint32_t> gone;
    for (std::size_t i = 0; i < expired; ++i) {
      gone.insert(s.segments[i].number);
      fs::remove(s.segments[i].events_path);
      fs::remove(s.segments[i].index_path);
    }
    s.segments.erase(s.segments.begin(), s.segments.begin() + static_cast<std::ptrdiff_t>(expired));
    for (auto it = s.by_seq.begin(); it != s.by_seq.end();) {
      it = gone.count(it->second.segment) ? s.by_seq.erase(it) : std::next(it);
    }
    for (auto it = by_decision_.begin(); it != by_decision_.end();) {
      bool drop = it->second.system_id == system_id && gone.count(it->second.segment);
      it = drop ? by_decision_.erase(it) : std::next(it);
    }
    s.anchor = *new_anchor;
  }
  return report;
}

// ---- verification -------------------------------------------------------------

ChainVerificationReport verify_store_stream(const EventStore& store, std::string_view system_id) {
  StoredStream stored = store.read_stored(system_id);
  ChainVerificationReport report = verify_stored_lines(stored.lines, stored.anchor);
  report.system_id = std::string(system_id);
  for (auto n : stored.truncated_segments) {
    report.findings.push_back({stored.lines.size(), std::nullopt, FindingKind::truncated_line,
                               "segment " + std::to_string(n) + " ends with a partial line"});
  }

  // Stored current_hash by sequence, for Merkle recomputation.
  std::map<std::uint64_t, std::string> hashes;
  for (const auto& line : stored.lines) {
    try {
      Json doc = parse_json(line);
      const Json& tm = doc.at("temporal_metadata");
      hashes[tm.at("sequence_number").get<std::uint64_t>()] = tm.at("hash_chain").at("current_hash").get<std::string>();
    } catch (const std::exception&) {
    }
  }

  std::vector<Checkpoint> checkpoints;
  for (std::size_t i = 0; i < stored.checkpoint_lines.size(); ++i) {
    try {
      checkpoints.push_back(Checkpoint::from_json(parse_json(stored.checkpoint_lines[i])));
    } catch (const Error& e) {
      report.findings.push_back({i, std::nullopt, FindingKind::parse_error, std::string("checkpoint: ") + e.what()});
    }
  }
  for (auto& f : verify_checkpoint_chain(checkpoints)) report.findings.push_back(std::move(f));
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const auto& cp = checkpoints[i];
    ++report.checkpoints_checked;
    if (cp.start_sequence <= stored.anchor.last_sequence) continue;  // pruned range
    std::vector<std::string> leaves;
    bool complete = true;
    for (auto seq = cp.start_sequence; seq <= cp.end_sequence && cp.end_sequence >= cp.start_sequence; ++seq) {
      auto it = hashes.find(seq);
      if (it == hashes.end()) {
        complete = false;
        break;
      }
      leaves.push_back(it->second);
    }
    if (!complete || leaves.empty()) {
      report.findings.push_back({i, cp.start_sequence, FindingKind::checkpoint_range_mismatch,
                                 "checkpoint " + std::to_string(cp.checkpoint_id) + " covers events not in the stream"});
      continue;
    }
    std::string root;
    try {
      root = merkle_root(leaves);
    } catch (const Error&) {
      root.clear();
    }
    if (root != cp.merkle_root) {
      report.findings.push_back({i, cp.start_sequence, FindingKind::checkpoint_root_mismatch,
                                 "checkpoint " + std::to_string(cp.checkpoint_id) + " Merkle root differs"});
    }
  }
  return report;
}

// ---- ledger -------------------------------------------------------------------

Ledger::Ledger(EventStore& store, LedgerOptions options) : store_(store), options_(std::move(options)) {}

std::mutex& Ledger::stream_mutex(const std::string& system_id) {
  std::lock_guard lock(map_mu_);
  auto& slot = stream_mu_[system_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

AppendResult Ledger::append(const DecisionEvent& draft, std::string_view requested) {
  const std::string stream = default_stream_for(draft, requested);
  std::lock_guard lock(stream_mutex(stream));

  SealResult sealed = seal_and_append(store_.stream_state(stream), draft, options_.signing);
  AppendResult result{std::move(sealed.event), {}, std::nullopt};
  result.location = store_.append_record(result.event, stream);

  if (options_.checkpoint_interval > 0) {
    auto existing = store_.checkpoints(stream);
    const Checkpoint* prev = existing.empty() ? nullptr : &existing.back();
    std::uint64_t start = prev ? prev->end_sequence + 1 : 1;
    std::uint64_t seq = *result.event.sequence_number();
    if (seq >= start && seq - start + 1 >= options_.checkpoint_interval) {
      auto batch = store_.scan_stream(stream, start);
      if (!batch.empty() && *batch.front().sequence_number() == start) {
        Checkpoint cp = build_checkpoint(stream, batch, prev);
        store_.append_checkpoint(cp);
        result.checkpoint = std::move(cp);
      }
    }
  }
  return result;
}

}  // namespace des
