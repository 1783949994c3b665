package acme.shop;

import org.apache.log4j.Logger;
import org.json.JSONObject;
import org.junit.Test;

public class Cart {}
