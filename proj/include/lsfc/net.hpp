// Copyright 2026 The lsfc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Shared network-domain vocabulary: hardware addresses, frames, trace
// events, and the MAC learning table. These are the value sorts every other
// layer (formula evaluation, satisfiability, machines, simulation) speaks.

#ifndef LSFC_NET_HPP_
#define LSFC_NET_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lsfc {

// ---------------------------------------------------------------------------
// Hardware (MAC) addresses.

struct MacAddr {
  std::array<std::uint8_t, 6> b{};

  friend bool operator==(const MacAddr&, const MacAddr&) = default;
  friend auto operator<=>(const MacAddr&, const MacAddr&) = default;
};

// All-ones broadcast address ff:ff:ff:ff:ff:ff.
MacAddr broadcast_addr();

// A unicast address has the least-significant bit of its first octet clear
// (which also rules out broadcast). Group addresses with that bit set but
// not all-ones are neither unicast nor broadcast.
bool is_ucast(const MacAddr& a);
bool is_bcast(const MacAddr& a);

std::string mac_str(const MacAddr& a);
// Parses "aa:bb:cc:dd:ee:ff". Throws std::invalid_argument on bad syntax.
MacAddr parse_mac(const std::string& s);

// ---------------------------------------------------------------------------
// Frames and trace events.

struct Frame {
  MacAddr da;         // destination hardware address
  MacAddr sa;         // source hardware address
  std::string proto;  // payload tag, e.g. "arpreq", "arpreply", "data"

  friend bool operator==(const Frame&, const Frame&) = default;
  friend auto operator<=>(const Frame&, const Frame&) = default;
};

// An interface is a (port, direction) pair; ports are 1-based.
struct Iface {
  int port = 0;
  bool egress = false;

  friend bool operator==(const Iface&, const Iface&) = default;
  friend auto operator<=>(const Iface&, const Iface&) = default;
};

// A location is either a singleton ingress interface or a (possibly empty)
// set of egress interfaces. Members are kept sorted and unique.
struct IfaceSet {
  std::vector<Iface> members;

  static IfaceSet ingress(int port);
  static IfaceSet egress(std::vector<int> ports);

  void insert(Iface ifc);
  bool contains(Iface ifc) const;
  // The ingress port when this is a singleton {p i}, otherwise nullopt.
  std::optional<int> ingress_port() const;
  // True when every member is an egress interface (the empty set included).
  bool subset_of_egress() const;

  friend bool operator==(const IfaceSet&, const IfaceSet&) = default;
};

std::string iface_set_str(const IfaceSet& s);  // "{2i}", "{3e,4e}", "{}"
IfaceSet parse_iface_set(const std::string& s);

// One trace row: a frame observed at a set of interfaces at a given time.
struct TraceEvent {
  std::int64_t time = 0;
  Frame frame;
  IfaceSet loc;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

// Trace file line format: `time | da | sa | proto | loc`.
std::string trace_line(const TraceEvent& e);
TraceEvent parse_trace_line(const std::string& line);
std::string render_trace(const std::vector<TraceEvent>& t);
std::vector<TraceEvent> parse_trace(const std::string& text);

// Workload file line format: `time port da sa proto` (ingress events only).
struct IngressEvent {
  std::int64_t time = 0;
  int port = 0;
  Frame frame;
};
std::string workload_line(const IngressEvent& e);
IngressEvent parse_workload_line(const std::string& line);
std::string render_workload(const std::vector<IngressEvent>& w);
std::vector<IngressEvent> parse_workload(const std::string& text);

// ---------------------------------------------------------------------------
// MAC learning table.

struct MacEntry {
  MacAddr mac;
  std::int64_t ts = 0;  // time the address was last seen as an ingress source
  int port = 0;         // port it was seen at

  friend bool operator==(const MacEntry&, const MacEntry&) = default;
};

struct MacTable {
  std::vector<MacEntry> entries;

  // Entry d is expired at `now` iff now - entries[d].ts > mto.
  bool expired(std::size_t d, std::int64_t now, std::int64_t mto) const;
  // Index of the unexpired entry holding `mac`, if any. The learning policy
  // maintains at most one unexpired entry per address.
  std::optional<std::size_t> find_unexpired(const MacAddr& mac,
                                            std::int64_t now,
                                            std::int64_t mto) const;

  friend bool operator==(const MacTable&, const MacTable&) = default;
};

// All-expired initial table: `size` entries stamped -(mto+1) so that every
// entry is expired at any time >= 0.
MacTable initial_table(std::size_t size, std::int64_t mto);

// Deterministic witness for the learning constraint: when `frame` arrives at
// ingress `port` (not the uplink) with a unicast source address, refresh the
// lowest-index entry already holding f.sa, else overwrite the lowest-index
// expired entry. Returns nullopt when the table must stay unchanged (no
// qualifying ingress, or the address is absent and no entry has expired).
std::optional<MacTable> learned_update(const MacTable& t, std::int64_t now,
                                       const Frame& frame, int port,
                                       int uplink_port, std::int64_t mto);

// ---------------------------------------------------------------------------
// Static network context shared by every evaluation.

using ArpInterp = std::function<bool(const Frame&, int port)>;

struct NetContext {
  int num_ports = 4;
  int uplink_port = 1;
  std::int64_t mto = 5;
  std::size_t mlt_size = 4;
  // Per-port hardware addresses, 1-based (index 0 unused).
  std::vector<MacAddr> port_macs;
  // Interpretation of the opaque arp-reqrx(frame, port) predicate. Absent
  // means constant false: generated workloads never carry an ARP request
  // for a switch port's own address.
  ArpInterp arp;

  MacAddr haddr(int port) const;
  bool arp_reqrx(const Frame& f, int port) const;
};

// A context with ports 1..n mapped to locally-administered addresses
// 02:00:00:00:00:0p.
NetContext default_context(int num_ports, int uplink_port, std::int64_t mto,
                           std::size_t mlt_size);

}  // namespace lsfc

#endif  // LSFC_NET_HPP_
