#pragma once

#include <chrono>
#include <memory>

#include "sg/broker.hpp"
#include "sg/rpc.hpp"

namespace sg::broker {

/// broker.register_cluster, broker.find_cluster, broker.list_clusters, ping.
rpc::HandlerMap make_handlers(Broker& broker);

class BrokerService {
public:
  BrokerService(BrokerConfig config, std::shared_ptr<const TimeSource> clock);
  ~BrokerService();

  Broker& broker() { return *broker_; }
  std::string address() const { return server_->address(); }
  void stop() { server_->stop(); }

private:
  std::unique_ptr<Broker> broker_;
  std::unique_ptr<rpc::Server> server_;
};

/// Typed client for the broker's RPC surface. find_cluster rethrows a remote
/// NoEligibleCluster as the local exception type.
class BrokerClient {
public:
  BrokerClient(std::string address, std::chrono::milliseconds timeout)
    : address_(std::move(address)), timeout_(timeout) {}

  Selection find_cluster(const JobSpec& spec) const;
  std::vector<ClusterDescriptor> list_clusters() const;
  void register_cluster(const ClusterDescriptor& d, Seconds ttl_s) const;

private:
  std::string address_;
  std::chrono::milliseconds timeout_;
};

}  // namespace sg::broker
