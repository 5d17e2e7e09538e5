//! Names shared by generated programs and generated events, so random
//! predicates are sometimes true.

pub const NODES: [&str; 6] = ["camera", "recorder", "rips", "planner", "controller", "intruder"];
pub const TOPICS: [&str; 7] = ["/camera/image", "/cmd_vel", "/commands", "/pose", "/pose2d", "/rosout", "/scan"];
pub const SERVICES: [&str; 4] = ["/camera/get_parameters", "/planner/plan", "/rips/set_level", "/recorder/describe"];
pub const MSG_TYPES: [&str; 4] = [
    "std_msgs/msg/String",
    "sensor_msgs/msg/Image",
    "geometry_msgs/msg/Twist",
    "geometry_msgs/msg/PoseStamped",
];
