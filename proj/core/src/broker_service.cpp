#include "sg/broker_service.hpp"

#include "sg/json_fields.hpp"

namespace sg::broker {

namespace f = fields;

rpc::HandlerMap make_handlers(Broker& broker) {
  rpc::HandlerMap h;
  h["ping"] = [](const json&) { return json(true); };
  h["broker.register_cluster"] = [&broker](const json& p) {
    broker.register_cluster(decode_cluster_descriptor(f::require(p, "descriptor")),
                            f::get_optional_int(p, "ttl_s"));
    return json{{"ok", true}};
  };
  h["broker.find_cluster"] = [&broker](const json& p) {
    return json(broker.find_cluster(validate_jobspec(f::require(p, "spec"))));
  };
  h["broker.list_clusters"] = [&broker](const json&) { return json(broker.list_clusters()); };
  return h;
}

BrokerService::BrokerService(BrokerConfig config, std::shared_ptr<const TimeSource> clock)
  : broker_(std::make_unique<Broker>(config, std::move(clock))),
    server_(rpc::serve(config.listen, make_handlers(*broker_))) {}

BrokerService::~BrokerService() { server_->stop(); }

Selection BrokerClient::find_cluster(const JobSpec& spec) const {
  try {
    return decode_selection(rpc::rpc_call(address_, "broker.find_cluster", json{{"spec", spec}}, timeout_));
  } catch (const rpc::RpcError& e) {
    if (e.code() == rpc::RpcErrorCode::kApplicationError && e.kind() == "NoEligibleCluster") {
      throw NoEligibleCluster(NoEligibleCluster::parse_reasons(e.message()));
    }
    throw;
  }
}

std::vector<ClusterDescriptor> BrokerClient::list_clusters() const {
  std::vector<ClusterDescriptor> out;
  for (const auto& d : rpc::rpc_call(address_, "broker.list_clusters", json::object(), timeout_)) {
    out.push_back(decode_cluster_descriptor(d));
  }
  return out;
}

void BrokerClient::register_cluster(const ClusterDescriptor& d, Seconds ttl_s) const {
  rpc::rpc_call(address_, "broker.register_cluster", json{{"descriptor", d}, {"ttl_s", ttl_s}},
                timeout_);
}

}  // namespace sg::broker
