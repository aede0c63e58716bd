/** Shapes of the JSON documents the service returns (see docs/record-schema.md). */
export {};
