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

#include "lsfc/net.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace lsfc {

MacAddr broadcast_addr() {
  MacAddr a;
  a.b.fill(0xff);
  return a;
}

bool is_ucast(const MacAddr& a) { return (a.b[0] & 0x01) == 0; }

bool is_bcast(const MacAddr& a) { return a == broadcast_addr(); }

std::string mac_str(const MacAddr& a) {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", a.b[0],
                a.b[1], a.b[2], a.b[3], a.b[4], a.b[5]);
  return buf;
}

MacAddr parse_mac(const std::string& s) {
  MacAddr a;
  unsigned v[6];
  if (std::sscanf(s.c_str(), "%x:%x:%x:%x:%x:%x", &v[0], &v[1], &v[2], &v[3],
                  &v[4], &v[5]) != 6)
    throw std::invalid_argument("bad MAC address: " + s);
  for (int i = 0; i < 6; ++i) {
    if (v[i] > 0xff) throw std::invalid_argument("bad MAC address: " + s);
    a.b[i] = static_cast<std::uint8_t>(v[i]);
  }
  return a;
}

IfaceSet IfaceSet::ingress(int port) {
  IfaceSet s;
  s.members.push_back({port, false});
  return s;
}

IfaceSet IfaceSet::egress(std::vector<int> ports) {
  IfaceSet s;
  for (int p : ports) s.insert({p, true});
  return s;
}

void IfaceSet::insert(Iface ifc) {
  auto it = std::lower_bound(members.begin(), members.end(), ifc);
  if (it == members.end() || *it != ifc) members.insert(it, ifc);
}

bool IfaceSet::contains(Iface ifc) const {
  return std::binary_search(members.begin(), members.end(), ifc);
}

std::optional<int> IfaceSet::ingress_port() const {
  if (members.size() == 1 && !members[0].egress) return members[0].port;
  return std::nullopt;
}

bool IfaceSet::subset_of_egress() const {
  return std::all_of(members.begin(), members.end(),
                     [](const Iface& i) { return i.egress; });
}

std::string iface_set_str(const IfaceSet& s) {
  std::string out = "{";
  bool first = true;
  for (const Iface& i : s.members) {
    if (!first) out += ",";
    first = false;
    out += std::to_string(i.port);
    out += i.egress ? 'e' : 'i';
  }
  return out + "}";
}

IfaceSet parse_iface_set(const std::string& s) {
  if (s.size() < 2 || s.front() != '{' || s.back() != '}')
    throw std::invalid_argument("bad interface set: " + s);
  IfaceSet out;
  std::string body = s.substr(1, s.size() - 2);
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    char dir = item.back();
    if (dir != 'i' && dir != 'e')
      throw std::invalid_argument("bad interface: " + item);
    out.insert({std::stoi(item.substr(0, item.size() - 1)), dir == 'e'});
  }
  return out;
}

namespace {
std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}
}  // namespace

std::string trace_line(const TraceEvent& e) {
  return std::to_string(e.time) + " | " + mac_str(e.frame.da) + " | " +
         mac_str(e.frame.sa) + " | " + e.frame.proto + " | " +
         iface_set_str(e.loc);
}

TraceEvent parse_trace_line(const std::string& line) {
  std::vector<std::string> cols;
  std::string cur;
  for (char c : line) {
    if (c == '|') {
      cols.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cols.push_back(trim(cur));
  if (cols.size() != 5) throw std::invalid_argument("bad trace line: " + line);
  TraceEvent e;
  e.time = std::stoll(cols[0]);
  e.frame.da = parse_mac(cols[1]);
  e.frame.sa = parse_mac(cols[2]);
  e.frame.proto = cols[3];
  e.loc = parse_iface_set(cols[4]);
  return e;
}

std::string render_trace(const std::vector<TraceEvent>& t) {
  std::string out;
  for (const TraceEvent& e : t) {
    out += trace_line(e);
    out += '\n';
  }
  return out;
}

std::vector<TraceEvent> parse_trace(const std::string& text) {
  std::vector<TraceEvent> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    out.push_back(parse_trace_line(line));
  }
  return out;
}

std::string workload_line(const IngressEvent& e) {
  return std::to_string(e.time) + " " + std::to_string(e.port) + " " +
         mac_str(e.frame.da) + " " + mac_str(e.frame.sa) + " " + e.frame.proto;
}

IngressEvent parse_workload_line(const std::string& line) {
  std::stringstream ss(line);
  IngressEvent e;
  std::string da, sa;
  if (!(ss >> e.time >> e.port >> da >> sa >> e.frame.proto))
    throw std::invalid_argument("bad workload line: " + line);
  e.frame.da = parse_mac(da);
  e.frame.sa = parse_mac(sa);
  return e;
}

std::string render_workload(const std::vector<IngressEvent>& w) {
  std::string out;
  for (const IngressEvent& e : w) {
    out += workload_line(e);
    out += '\n';
  }
  return out;
}

std::vector<IngressEvent> parse_workload(const std::string& text) {
  std::vector<IngressEvent> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    out.push_back(parse_workload_line(line));
  }
  return out;
}

bool MacTable::expired(std::size_t d, std::int64_t now,
                       std::int64_t mto) const {
  return now - entries.at(d).ts > mto;
}

std::optional<std::size_t> MacTable::find_unexpired(const MacAddr& mac,
                                                    std::int64_t now,
                                                    std::int64_t mto) const {
  for (std::size_t d = 0; d < entries.size(); ++d)
    if (entries[d].mac == mac && !expired(d, now, mto)) return d;
  return std::nullopt;
}

MacTable initial_table(std::size_t size, std::int64_t mto) {
  MacTable t;
  t.entries.resize(size);
  for (MacEntry& e : t.entries) {
    e.mac = MacAddr{};  // 00:..:00
    e.ts = -(mto + 1);
    e.port = 0;
  }
  return t;
}

std::optional<MacTable> learned_update(const MacTable& t, std::int64_t now,
                                       const Frame& frame, int port,
                                       int uplink_port, std::int64_t mto) {
  if (port == uplink_port || !is_ucast(frame.sa)) return std::nullopt;
  std::optional<std::size_t> slot;
  for (std::size_t d = 0; d < t.entries.size(); ++d) {
    if (t.entries[d].mac == frame.sa) {
      slot = d;
      break;
    }
  }
  if (!slot) {
    for (std::size_t d = 0; d < t.entries.size(); ++d) {
      if (t.expired(d, now, mto)) {
        slot = d;
        break;
      }
    }
  }
  if (!slot) return std::nullopt;
  MacTable out = t;
  out.entries[*slot] = {frame.sa, now, port};
  return out;
}

MacAddr NetContext::haddr(int port) const {
  if (port < 1 || port >= static_cast<int>(port_macs.size()))
    throw std::out_of_range("haddr: no such port " + std::to_string(port));
  return port_macs[static_cast<std::size_t>(port)];
}

bool NetContext::arp_reqrx(const Frame& f, int port) const {
  return arp ? arp(f, port) : false;
}

NetContext default_context(int num_ports, int uplink_port, std::int64_t mto,
                           std::size_t mlt_size) {
  NetContext c;
  c.num_ports = num_ports;
  c.uplink_port = uplink_port;
  c.mto = mto;
  c.mlt_size = mlt_size;
  c.port_macs.resize(static_cast<std::size_t>(num_ports) + 1);
  for (int p = 1; p <= num_ports; ++p) {
    MacAddr a{};
    a.b = {0x02, 0x00, 0x00, 0x00, 0x00, static_cast<std::uint8_t>(p)};
    c.port_macs[static_cast<std::size_t>(p)] = a;
  }
  return c;
}

}  // namespace lsfc
