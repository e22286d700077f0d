//! Shows what each steering condition puts on the wire.

use steer_audit::agent_gateway::{
    request_body, strip_icp, wrap_icp, Emotion, EndpointConfig, Intensity, Scope, SteeringCondition,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let endpoint = EndpointConfig::new("http://127.0.0.1:8089/v1", "local-model");
    let prompt = "Choose A or B.";

    let rls = SteeringCondition::rls(Emotion::Fear, 35.0, Scope::AllNew, Some(vec![14, 15, 16]))?;
    println!("{}", serde_json::to_string_pretty(&request_body(&endpoint, prompt, &rls))?);

    let icp = SteeringCondition::Icp { emotion: Emotion::Sadness, intensity: Intensity::High };
    let wrapped = wrap_icp(prompt, Emotion::Sadness, Intensity::High)?;
    println!("\n{}: {wrapped}", icp.label());
    assert_eq!(strip_icp(&wrapped), prompt);

    // Out-of-range parameters are refused before any request is built.
    match SteeringCondition::rls(Emotion::Joy, f64::NAN, Scope::AllNew, None) {
        Ok(_) => unreachable!(),
        Err(e) => println!("\nrejected: {e}"),
    }
    Ok(())
}
