package acme.shop;

import org.slf4j.Logger;
import org.slf4j.LoggerFactory;
import com.google.gson.Gson;
import org.junit.Test;

public class Cart {}
