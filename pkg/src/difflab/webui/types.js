// Wire types for the difflab session service.
export {};
